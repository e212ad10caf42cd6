//! Pairwise comparison of result sets: Wilcoxon tests over per-class accuracies and average
//! ranks over a chosen score.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::evaluation::rank::average_rank;
use crate::evaluation::report::ResultRow;
use crate::evaluation::wilcoxon::wilcoxon_two_tailed;
use crate::{Error, Result};

/// p-values below this are marked significant.
pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankScore {
    Kappa,
    Oa,
    Aa,
}

impl FromStr for RankScore {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kappa" => Ok(Self::Kappa),
            "oa" => Ok(Self::Oa),
            "aa" => Ok(Self::Aa),
            _ => Err(Error::InvalidConfig(format!("unknown score `{s}` (kappa, oa, aa)"))),
        }
    }
}

/// Rows of one results file under a display name.
#[derive(Debug, Clone)]
pub struct ResultSet {
    pub name: String,
    pub rows: Vec<ResultRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub names: Vec<String>,
    pub datasets: Vec<String>,
    /// Paired units: `(dataset, class)` with the class 1-based.
    pub cells: Vec<(String, usize)>,
    /// `p_values[i][j]` compares set `i` with set `j`.
    pub p_values: Vec<Vec<f64>>,
    /// `scores[i][d]`: mean rank score of set `i` on dataset `d`.
    pub scores: Vec<Vec<f64>>,
    pub average_rank: Vec<f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean per-class accuracy of every `(dataset, class)` that has a value in some row.
fn class_means(rows: &[ResultRow]) -> BTreeMap<(String, usize), f64> {
    let mut acc: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    for r in rows {
        for (c, v) in r.per_class.iter().enumerate() {
            if let Some(v) = v {
                acc.entry((r.dataset.clone(), c + 1)).or_default().push(*v);
            }
        }
    }
    acc.into_iter().map(|(k, v)| (k, mean(&v))).collect()
}

fn score_means(rows: &[ResultRow], by: RankScore) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in rows {
        let s = match by {
            RankScore::Kappa => r.kappa,
            RankScore::Oa => r.oa,
            RankScore::Aa => r.aa,
        };
        acc.entry(r.dataset.clone()).or_default().push(s);
    }
    acc.into_iter().map(|(k, v)| (k, mean(&v))).collect()
}

pub fn compare(sets: &[ResultSet], by: RankScore) -> Result<Comparison> {
    if sets.len() < 2 {
        return Err(Error::InvalidConfig("comparison needs at least two result sets".into()));
    }
    if let Some(empty) = sets.iter().find(|s| s.rows.is_empty()) {
        return Err(Error::EmptyInput(format!("{} has no rows", empty.name)));
    }
    let means: Vec<_> = sets.iter().map(|s| class_means(&s.rows)).collect();
    let cells: Vec<(String, usize)> = means[0].keys().cloned().collect();
    for (set, m) in sets.iter().zip(&means).skip(1) {
        let keys: Vec<(String, usize)> = m.keys().cloned().collect();
        if keys != cells {
            let only = |a: &[(String, usize)], b: &[(String, usize)]| {
                a.iter().filter(|k| !b.contains(k)).map(|(d, c)| format!("{d}/c{c}")).collect::<Vec<_>>().join(" ")
            };
            return Err(Error::Unpaired(format!(
                "{} vs {}: only in first [{}], only in second [{}]",
                sets[0].name,
                set.name,
                only(&cells, &keys),
                only(&keys, &cells)
            )));
        }
    }
    let columns: Vec<Vec<f64>> = means.iter().map(|m| m.values().copied().collect()).collect();
    let n = sets.len();
    let mut p_values = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let p = wilcoxon_two_tailed(&columns[i], &columns[j])?.p_value;
            p_values[i][j] = p;
            p_values[j][i] = p;
        }
    }
    let datasets: Vec<String> = {
        let mut d: Vec<String> = cells.iter().map(|(d, _)| d.clone()).collect();
        d.dedup();
        d
    };
    let scores: Vec<Vec<f64>> = sets
        .iter()
        .map(|s| {
            let m = score_means(&s.rows, by);
            datasets.iter().map(|d| m.get(d).copied().unwrap_or(f64::NAN)).collect()
        })
        .collect();
    let table: Vec<Vec<Option<f64>>> =
        scores.iter().map(|row| row.iter().map(|v| v.is_finite().then_some(*v)).collect()).collect();
    let average_rank = average_rank(&table)?;
    Ok(Comparison { names: sets.iter().map(|s| s.name.clone()).collect(), datasets, cells, p_values, scores, average_rank })
}

pub fn format_comparison(c: &Comparison) -> String {
    let width = c.names.iter().map(String::len).max().unwrap_or(0).max(8);
    let mut out = String::new();
    let _ = writeln!(out, "wilcoxon two-tailed p-values over {} paired per-class cells (* p < {SIGNIFICANCE})", c.cells.len());
    let _ = write!(out, "{:width$}", "");
    for name in &c.names {
        let _ = write!(out, " {name:>width$}");
    }
    out.push('\n');
    for (i, name) in c.names.iter().enumerate() {
        let _ = write!(out, "{name:width$}");
        for j in 0..c.names.len() {
            let cell = if i == j {
                "-".to_string()
            } else {
                let p = c.p_values[i][j];
                format!("{p:.5}{}", if p < SIGNIFICANCE { "*" } else { "" })
            };
            let _ = write!(out, " {cell:>width$}");
        }
        out.push('\n');
    }
    out.push('\n');
    let _ = write!(out, "{:width$}", "");
    for d in &c.datasets {
        let _ = write!(out, " {d:>width$}");
    }
    let _ = writeln!(out, " {:>width$}", "AR");
    for (i, name) in c.names.iter().enumerate() {
        let _ = write!(out, "{name:width$}");
        for v in &c.scores[i] {
            let _ = write!(out, " {v:>width$.4}");
        }
        let _ = writeln!(out, " {:>width$.2}", c.average_rank[i]);
    }
    out
}
