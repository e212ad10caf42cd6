//! Results CSV and plain-text summaries.
//!
//! One row per (fold, run) cell with columns
//! `method,dataset,fold,run,oa,aa,kappa,p_o,p_e,training_time_s,inference_time_ms,epochs,c1..cN`.
//! Per-class cells are empty for classes absent from the fold's test set.

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::evaluation::experiment::{ExperimentResult, MeanStd, MetricsReport};
use crate::{Error, Result};

pub const FIXED_COLUMNS: [&str; 12] = [
    "method",
    "dataset",
    "fold",
    "run",
    "oa",
    "aa",
    "kappa",
    "p_o",
    "p_e",
    "training_time_s",
    "inference_time_ms",
    "epochs",
];

pub fn results_header(classes: usize) -> Vec<String> {
    FIXED_COLUMNS.iter().map(|s| s.to_string()).chain((1..=classes).map(|c| format!("c{c}"))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: String,
    pub dataset: String,
    pub fold: usize,
    pub run: usize,
    pub oa: f64,
    pub aa: f64,
    pub kappa: f64,
    pub p_o: f64,
    pub p_e: f64,
    pub training_time_s: f64,
    pub inference_time_ms: f64,
    pub epochs: usize,
    pub per_class: Vec<Option<f64>>,
}

impl ResultRow {
    pub fn from_report(method: &str, dataset: &str, r: &MetricsReport) -> Self {
        Self {
            method: method.into(),
            dataset: dataset.into(),
            fold: r.fold,
            run: r.run,
            oa: r.metrics.oa,
            aa: r.metrics.aa,
            kappa: r.metrics.kappa,
            p_o: r.metrics.p_o,
            p_e: r.metrics.p_e,
            training_time_s: r.training_time_s,
            inference_time_ms: r.inference_time_ms,
            epochs: r.epochs,
            per_class: r.metrics.per_class.clone(),
        }
    }

    fn record(&self) -> Vec<String> {
        let mut rec = vec![
            self.method.clone(),
            self.dataset.clone(),
            self.fold.to_string(),
            self.run.to_string(),
            self.oa.to_string(),
            self.aa.to_string(),
            self.kappa.to_string(),
            self.p_o.to_string(),
            self.p_e.to_string(),
            self.training_time_s.to_string(),
            self.inference_time_ms.to_string(),
            self.epochs.to_string(),
        ];
        rec.extend(self.per_class.iter().map(|v| v.map(|v| v.to_string()).unwrap_or_default()));
        rec
    }
}

pub fn experiment_rows(result: &ExperimentResult) -> Vec<ResultRow> {
    result.reports.iter().map(|r| ResultRow::from_report(&result.method, &result.dataset, r)).collect()
}

pub fn write_results<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let classes = rows.first().map_or(0, |r| r.per_class.len());
    if rows.iter().any(|r| r.per_class.len() != classes) {
        return Err(Error::ShapeMismatch("rows disagree on the number of classes".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(results_header(classes))?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let classes = header.len().saturating_sub(FIXED_COLUMNS.len());
    if header != results_header(classes) {
        return Err(Error::Format(format!("unexpected results header: {}", header.join(","))));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |col: &str| Error::Format(format!("row {}: bad value in column {col}", line + 1));
        let num = |i: usize| rec[i].trim().parse::<f64>().map_err(|_| bad(FIXED_COLUMNS[i]));
        let int = |i: usize| rec[i].trim().parse::<usize>().map_err(|_| bad(FIXED_COLUMNS[i]));
        let per_class = (0..classes)
            .map(|c| {
                let cell = rec[FIXED_COLUMNS.len() + c].trim();
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>().map(Some).map_err(|_| bad(&format!("c{}", c + 1)))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(ResultRow {
            method: rec[0].to_string(),
            dataset: rec[1].to_string(),
            fold: int(2)?,
            run: int(3)?,
            oa: num(4)?,
            aa: num(5)?,
            kappa: num(6)?,
            p_o: num(7)?,
            p_e: num(8)?,
            training_time_s: num(9)?,
            inference_time_ms: num(10)?,
            epochs: int(11)?,
            per_class,
        });
    }
    Ok(rows)
}

fn line(out: &mut String, name: &str, m: MeanStd) {
    let _ = writeln!(out, "{name:<20} {:.4} ± {:.4}", m.mean, m.std);
}

pub fn format_summary(result: &ExperimentResult) -> Result<String> {
    let s = result.summary()?;
    let mut out = String::new();
    let _ = writeln!(out, "method: {}", result.method);
    let _ = writeln!(out, "dataset: {}", result.dataset);
    let _ = writeln!(out, "reports: {}", s.reports);
    line(&mut out, "oa", s.oa);
    line(&mut out, "aa", s.aa);
    line(&mut out, "kappa", s.kappa);
    line(&mut out, "training_time_s", s.training_time_s);
    line(&mut out, "inference_time_ms", s.inference_time_ms);
    for c in 0..result.classes {
        let vals: Vec<f64> = result.reports.iter().filter_map(|r| r.metrics.per_class[c]).collect();
        if !vals.is_empty() {
            line(&mut out, &format!("c{}", c + 1), MeanStd::of(&vals));
        }
    }
    Ok(out)
}
