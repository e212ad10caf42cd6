//! Two-tailed Wilcoxon signed-rank test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::{Error, Result};

/// Largest effective sample size for which [`PValueMethod::Auto`] enumerates exactly.
pub const EXACT_LIMIT: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PValueMethod {
    /// Exact up to [`EXACT_LIMIT`] non-zero differences, normal approximation above.
    Auto,
    Exact,
    /// Normal approximation with tie-corrected variance and continuity correction.
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// `min(W+, W-)`.
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_value: f64,
    /// Pairs left after dropping zero differences.
    pub n_effective: usize,
}

/// Average ranks (1-based) of `values`, ties sharing the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

pub fn wilcoxon_two_tailed(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    wilcoxon_with(a, b, PValueMethod::Auto)
}

pub fn wilcoxon_with(a: &[f64], b: &[f64], method: PValueMethod) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} paired values", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("Wilcoxon test needs at least one pair".into()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult { statistic: 0.0, w_plus: 0.0, w_minus: 0.0, p_value: 1.0, n_effective: 0 });
    }
    let ranks = average_ranks(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>());
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let w_minus = n as f64 * (n as f64 + 1.0) / 2.0 - w_plus;
    let statistic = w_plus.min(w_minus);
    let exact = match method {
        PValueMethod::Auto => n <= EXACT_LIMIT,
        PValueMethod::Exact => true,
        PValueMethod::Normal => false,
    };
    let p_value = if exact { exact_p(&ranks, statistic) } else { normal_p(&ranks, statistic) };
    Ok(WilcoxonResult { statistic, w_plus, w_minus, p_value, n_effective: n })
}

/// Doubles `ranks` so that averaged ranks become integers.
fn doubled(ranks: &[f64]) -> Vec<usize> {
    ranks.iter().map(|r| (2.0 * r).round() as usize).collect()
}

/// `min(1, 2 P(S <= w))` where `S` sums a random sign subset of `ranks`, counted by dynamic
/// programming over the doubled ranks (equivalent to enumerating every sign assignment).
fn exact_p(ranks: &[f64], w: f64) -> f64 {
    let r2 = doubled(ranks);
    let total: usize = r2.iter().sum();
    let mut ways = vec![0f64; total + 1];
    ways[0] = 1.0;
    let mut reach = 0;
    for &r in &r2 {
        reach += r;
        for s in (r..=reach).rev() {
            ways[s] += ways[s - r];
        }
    }
    let limit = (2.0 * w).round() as usize;
    let tail: f64 = ways[..=limit.min(total)].iter().sum();
    (2.0 * tail / 2f64.powi(ranks.len() as i32)).min(1.0)
}

fn normal_p(ranks: &[f64], w: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    for group in sorted.chunk_by(|a, b| a == b) {
        let t = group.len() as f64;
        ties += t * t * t - t;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - ties / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((mean - w).abs() - 0.5).max(0.0) / var.sqrt();
    let std = Normal::standard();
    (2.0 * (1.0 - std.cdf(z))).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SeededRng;

    /// Enumerates every sign assignment of the doubled rank vector.
    fn brute_force(ranks: &[f64], w: f64) -> f64 {
        let r2 = doubled(ranks);
        let limit = (2.0 * w).round() as usize;
        let n = r2.len();
        let hits = (0u32..1 << n)
            .filter(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| r2[i]).sum::<usize>() <= limit)
            .count();
        (2.0 * hits as f64 / (1u64 << n) as f64).min(1.0)
    }

    fn ranks_of(a: &[f64], b: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).abs()).filter(|d| *d != 0.0).collect();
        average_ranks(&d)
    }

    #[test]
    fn identical_samples() {
        let r = wilcoxon_two_tailed(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((r.p_value, r.n_effective), (1.0, 0));
    }

    #[test]
    fn five_positive_differences() {
        let r = wilcoxon_two_tailed(&[2.0, 3.0, 4.0, 5.0, 6.0], &[1.0, 1.5, 1.0, 0.0, 4.5]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn twelve_wins_without_ties() {
        let a: Vec<f64> = (0..12).map(|i| 1.0 + i as f64 * 0.1).collect();
        let b: Vec<f64> = (0..12).map(|i| 0.5 - i as f64 * 0.013).collect();
        let r = wilcoxon_two_tailed(&a, &b).unwrap();
        assert!((r.p_value - 2.0 / 4096.0).abs() < 1e-15);
    }

    #[test]
    fn ties_and_zeros() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        let r = wilcoxon_two_tailed(&[1.0, 2.0, 3.0, 4.0], &[1.0, 1.0, 2.0, 5.0]).unwrap();
        assert_eq!(r.n_effective, 3);
        assert_eq!((r.w_plus, r.w_minus), (4.0, 2.0));
    }

    #[test]
    fn exact_matches_enumeration_and_is_symmetric() {
        let mut rng = SeededRng::new(7);
        for trial in 0..300 {
            let n = 1 + trial % 12;
            // coarse values force ties and zeros
            let a: Vec<f64> = (0..n).map(|_| rng.below(6) as f64).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.below(6) as f64).collect();
            let r = wilcoxon_with(&a, &b, PValueMethod::Exact).unwrap();
            if r.n_effective > 0 {
                let want = brute_force(&ranks_of(&a, &b), r.statistic);
                assert!((r.p_value - want).abs() < 1e-12);
            }
            let swapped = wilcoxon_with(&b, &a, PValueMethod::Exact).unwrap();
            assert!((swapped.p_value - r.p_value).abs() < 1e-15);
        }
    }

    #[test]
    fn normal_approximation_is_close_at_twelve() {
        let mut rng = SeededRng::new(8);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let a: Vec<f64> = (0..12).map(|_| rng.normal()).collect();
            let b: Vec<f64> = (0..12).map(|_| rng.normal() + 0.3).collect();
            let e = wilcoxon_with(&a, &b, PValueMethod::Exact).unwrap().p_value;
            let z = wilcoxon_with(&a, &b, PValueMethod::Normal).unwrap().p_value;
            worst = worst.max((e - z).abs());
        }
        assert!(worst < 0.02, "{worst}");
    }

    #[test]
    fn large_samples_use_normal_approximation() {
        let a: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..40).map(|i| i as f64 + if i % 3 == 0 { 0.5 } else { -0.5 - i as f64 * 0.01 }).collect();
        let auto = wilcoxon_two_tailed(&a, &b).unwrap();
        let normal = wilcoxon_with(&a, &b, PValueMethod::Normal).unwrap();
        assert_eq!(auto.p_value, normal.p_value);
        assert!(wilcoxon_two_tailed(&[1.0], &[]).is_err());
    }
}
