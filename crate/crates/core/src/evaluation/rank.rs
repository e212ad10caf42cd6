//! Average rank of methods across datasets.

use crate::evaluation::wilcoxon::average_ranks;
use crate::{Error, Result};

/// Best-first ranks (1 = highest score), ties sharing their average rank.
pub fn descending_ranks(scores: &[f64]) -> Vec<f64> {
    let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
    average_ranks(&negated)
}

/// `table[m][d]` is the kappa of method `m` on dataset `d`; returns each method's mean rank.
pub fn average_rank(table: &[Vec<Option<f64>>]) -> Result<Vec<f64>> {
    let methods = table.len();
    let datasets = table.first().map_or(0, Vec::len);
    if methods == 0 || datasets == 0 {
        return Err(Error::EmptyInput("rank table is empty".into()));
    }
    let mut sums = vec![0.0; methods];
    for d in 0..datasets {
        let column = table
            .iter()
            .enumerate()
            .map(|(m, row)| {
                row.get(d)
                    .copied()
                    .flatten()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::EmptyInput(format!("missing score for method {m}, dataset {d}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        for (s, r) in sums.iter_mut().zip(descending_ranks(&column)) {
            *s += r;
        }
    }
    if table.iter().any(|row| row.len() != datasets) {
        return Err(Error::ShapeMismatch("rank table rows differ in length".into()));
    }
    Ok(sums.into_iter().map(|s| s / datasets as f64).collect())
}
