//! Confusion matrices and the accuracy and agreement scores derived from them.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Counts indexed `(true class, predicted class)`, both 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Result<Self> {
        if classes == 0 {
            return Err(Error::EmptyInput("confusion matrix needs at least one class".into()));
        }
        Ok(Self { classes, counts: vec![0; classes * classes] })
    }

    pub fn from_counts(classes: usize, counts: Vec<u64>) -> Result<Self> {
        if classes == 0 || counts.len() != classes * classes {
            return Err(Error::ShapeMismatch(format!("{} counts for {classes} classes", counts.len())));
        }
        Ok(Self { classes, counts })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn add(&mut self, truth: u16, predicted: u16) -> Result<()> {
        let check = |l: u16| {
            if l == 0 || l as usize > self.classes {
                Err(Error::InvalidLabel { label: l as usize, classes: self.classes })
            } else {
                Ok(l as usize - 1)
            }
        };
        let (t, p) = (check(truth)?, check(predicted)?);
        self.counts[t * self.classes + p] += 1;
        Ok(())
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[(truth - 1) * self.classes + predicted - 1]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, truth: usize) -> u64 {
        (1..=self.classes).map(|p| self.get(truth, p)).sum()
    }

    pub fn col_sum(&self, predicted: usize) -> u64 {
        (1..=self.classes).map(|t| self.get(t, predicted)).sum()
    }

    pub fn trace(&self) -> u64 {
        (1..=self.classes).map(|c| self.get(c, c)).sum()
    }
}

pub fn confusion(truth: &[u16], predicted: &[u16], classes: usize) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::ShapeMismatch(format!("{} true labels vs {} predictions", truth.len(), predicted.len())));
    }
    let mut cm = ConfusionMatrix::new(classes)?;
    for (&t, &p) in truth.iter().zip(predicted) {
        cm.add(t, p)?;
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub oa: f64,
    /// Mean over the classes present in the test set.
    pub aa: f64,
    /// `None` for classes without test samples.
    pub per_class: Vec<Option<f64>>,
    pub kappa: f64,
    pub p_o: f64,
    pub p_e: f64,
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyInput("confusion matrix has no samples".into()));
    }
    let n = total as f64;
    let p_o = cm.trace() as f64 / n;
    let per_class: Vec<Option<f64>> = (1..=cm.classes())
        .map(|c| {
            let row = cm.row_sum(c);
            (row > 0).then(|| cm.get(c, c) as f64 / row as f64)
        })
        .collect();
    let present: Vec<f64> = per_class.iter().flatten().copied().collect();
    let aa = present.iter().sum::<f64>() / present.len() as f64;
    let p_e = (1..=cm.classes()).map(|c| cm.row_sum(c) as f64 * cm.col_sum(c) as f64).sum::<f64>() / (n * n);
    let kappa = if p_e == 1.0 {
        if p_o == 1.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - (1.0 - p_o) / (1.0 - p_e)
    };
    Ok(Metrics { oa: p_o, aa, per_class, kappa, p_o, p_e })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SeededRng;

    /// Recomputes the scores from individual (truth, prediction) pairs.
    fn oracle(classes: usize, counts: &[u64]) -> (f64, f64, f64) {
        let mut pairs = Vec::new();
        for t in 0..classes {
            for p in 0..classes {
                for _ in 0..counts[t * classes + p] {
                    pairs.push((t, p));
                }
            }
        }
        let n = pairs.len() as f64;
        let agree = pairs.iter().filter(|(t, p)| t == p).count() as f64 / n;
        let mut accs = Vec::new();
        let mut chance = 0.0;
        for c in 0..classes {
            let truth_c = pairs.iter().filter(|(t, _)| *t == c).count();
            let pred_c = pairs.iter().filter(|(_, p)| *p == c).count();
            chance += (truth_c as f64 / n) * (pred_c as f64 / n);
            if truth_c > 0 {
                accs.push(pairs.iter().filter(|(t, p)| *t == c && *p == c).count() as f64 / truth_c as f64);
            }
        }
        let aa = accs.iter().sum::<f64>() / accs.len() as f64;
        let kappa = if (1.0 - chance).abs() < 1e-15 { if agree == 1.0 { 1.0 } else { 0.0 } } else { (agree - chance) / (1.0 - chance) };
        (agree, aa, kappa)
    }

    #[test]
    fn chance_and_perfect_agreement() {
        let m = metrics(&ConfusionMatrix::from_counts(2, vec![1, 1, 1, 1]).unwrap()).unwrap();
        assert_eq!((m.p_o, m.p_e, m.kappa), (0.5, 0.5, 0.0));
        let m = metrics(&ConfusionMatrix::from_counts(3, vec![4, 0, 0, 0, 2, 0, 0, 0, 7]).unwrap()).unwrap();
        assert_eq!((m.oa, m.aa, m.kappa), (1.0, 1.0, 1.0));
    }

    #[test]
    fn degenerate_chance_agreement() {
        // one class only: p_e = 1
        let m = metrics(&ConfusionMatrix::from_counts(2, vec![5, 0, 0, 0]).unwrap()).unwrap();
        assert_eq!(m.kappa, 1.0);
        assert_eq!(m.per_class, vec![Some(1.0), None]);
        assert!(metrics(&ConfusionMatrix::new(2).unwrap()).is_err());
    }

    #[test]
    fn confusion_counts() {
        let cm = confusion(&[1], &[2], 2).unwrap();
        assert_eq!(cm.get(1, 2), 1);
        assert_eq!(cm.total(), 1);
        assert!(confusion(&[1, 3], &[1, 1], 2).is_err());
        assert!(confusion(&[1], &[1, 1], 2).is_err());
        let mut rng = SeededRng::new(0);
        let t: Vec<u16> = (0..500).map(|_| 1 + rng.below(5) as u16).collect();
        let p: Vec<u16> = (0..500).map(|_| 1 + rng.below(5) as u16).collect();
        let cm = confusion(&t, &p, 5).unwrap();
        assert_eq!(cm.total(), 500);
        for i in 1..=5 {
            for j in 1..=5 {
                let n = t.iter().zip(&p).filter(|&(&a, &b)| a as usize == i && b as usize == j).count();
                assert_eq!(cm.get(i, j), n as u64);
            }
        }
    }

    #[test]
    fn random_matrices_match_oracle() {
        let mut rng = SeededRng::new(1);
        for _ in 0..300 {
            let counts: Vec<u64> = (0..16).map(|_| rng.below(6) as u64).collect();
            if counts.iter().sum::<u64>() == 0 {
                continue;
            }
            let m = metrics(&ConfusionMatrix::from_counts(4, counts.clone()).unwrap()).unwrap();
            let (oa, aa, kappa) = oracle(4, &counts);
            assert!((m.oa - oa).abs() < 1e-12);
            assert!((m.aa - aa).abs() < 1e-12);
            assert!((m.kappa - kappa).abs() < 1e-12);
            assert!((-1.0..=1.0).contains(&m.kappa));
        }
    }

    #[test]
    fn relabelling_preserves_scores() {
        let mut rng = SeededRng::new(2);
        let t: Vec<u16> = (0..200).map(|_| 1 + rng.below(4) as u16).collect();
        let p: Vec<u16> = t.iter().map(|&l| if rng.unit() < 0.7 { l } else { 1 + rng.below(4) as u16 }).collect();
        let perm = [3u16, 1, 4, 2];
        let relabel = |v: &[u16]| v.iter().map(|&l| perm[l as usize - 1]).collect::<Vec<_>>();
        let a = metrics(&confusion(&t, &p, 4).unwrap()).unwrap();
        let b = metrics(&confusion(&relabel(&t), &relabel(&p), 4).unwrap()).unwrap();
        assert!((a.oa - b.oa).abs() < 1e-15);
        assert!((a.kappa - b.kappa).abs() < 1e-12);
    }
}
