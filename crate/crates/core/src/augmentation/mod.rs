//! Training-time patch augmentation under a class-balance budget.

pub mod ops;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{PaddedCube, Sample};
use crate::{Error, Result, SeededRng};

pub use ops::{flip_sample, rotate_sample, rotation_window, zoom_sample, FlipAxis, ZOOM_MAX, ZOOM_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AugmentationKind {
    None,
    Rotate,
    Flip,
    Zoom,
    /// One of rotate, flip or zoom, drawn uniformly per synthetic sample.
    Mixed,
}

impl AugmentationKind {
    pub const ALL: [AugmentationKind; 5] = [Self::None, Self::Rotate, Self::Flip, Self::Zoom, Self::Mixed];

    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Rotate => "rotate",
            Self::Flip => "flip",
            Self::Zoom => "zoom",
            Self::Mixed => "mixed",
        }
    }
}

impl fmt::Display for AugmentationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AugmentationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown augmentation `{s}` (none, rotate, flip, zoom, mixed)")))
    }
}

/// Per-class original and synthetic sample counts; index `c - 1` holds class `c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentationBudget {
    pub original: Vec<usize>,
    pub synthetic: Vec<usize>,
}

impl AugmentationBudget {
    pub fn total_original(&self) -> usize {
        self.original.iter().sum()
    }

    pub fn total_synthetic(&self) -> usize {
        self.synthetic.iter().sum()
    }
}

/// Each class may grow by at most its own size and never beyond the largest class.
pub fn compute_budget(class_counts: &[usize]) -> Result<AugmentationBudget> {
    let n_max = class_counts.iter().copied().max().unwrap_or(0);
    if n_max == 0 {
        return Err(Error::EmptyInput("augmentation budget needs at least one sample".into()));
    }
    Ok(AugmentationBudget {
        original: class_counts.to_vec(),
        synthetic: class_counts.iter().map(|&n| n.min(n_max - n)).collect(),
    })
}

/// Counts samples per class for labels `1..=classes`.
pub fn class_counts(samples: &[Sample], classes: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0; classes];
    for s in samples {
        match (s.label as usize).checked_sub(1).filter(|&c| c < classes) {
            Some(c) => counts[c] += 1,
            None => return Err(Error::InvalidLabel { label: s.label as usize, classes }),
        }
    }
    Ok(counts)
}

fn synthesize(
    kind: AugmentationKind,
    source: &Sample,
    padded: &PaddedCube,
    rng: &mut SeededRng,
) -> Result<Sample> {
    let size = source.patch.shape()[0];
    let op = match kind {
        AugmentationKind::Mixed => [AugmentationKind::Rotate, AugmentationKind::Flip, AugmentationKind::Zoom][rng.below(3)],
        other => other,
    };
    match op {
        AugmentationKind::Rotate => rotate_sample(padded, source.origin, source.label, size, rng.uniform(0.0, 360.0)?),
        AugmentationKind::Flip => {
            let axis = if rng.below(2) == 0 { FlipAxis::Horizontal } else { FlipAxis::Vertical };
            Ok(flip_sample(source, axis))
        }
        AugmentationKind::Zoom => zoom_sample(source, rng.uniform(ZOOM_MIN, ZOOM_MAX)?),
        AugmentationKind::None | AugmentationKind::Mixed => unreachable!("resolved above"),
    }
}

/// Appends `budget.synthetic[c - 1]` augmented copies of class-`c` originals after the originals.
///
/// Sources are drawn uniformly with replacement within each class. Class `c` uses the rng stream
/// `rng.fork(c)`, so the result does not depend on how classes are scheduled. `padded` must be the
/// scene the samples were cut from, padded by at least `rotation_window(s) / 2` for rotation.
pub fn augment_training_set(
    samples: &[Sample],
    kind: AugmentationKind,
    padded: &PaddedCube,
    budget: &AugmentationBudget,
    rng: &SeededRng,
) -> Result<Vec<Sample>> {
    let classes = budget.original.len();
    if class_counts(samples, classes)? != budget.original || budget.synthetic.len() != classes {
        return Err(Error::Budget(format!("budget for {classes} classes does not match the sample class counts")));
    }
    let mut out = samples.to_vec();
    if kind == AugmentationKind::None {
        return Ok(out);
    }
    for c in 1..=classes {
        let members: Vec<&Sample> = samples.iter().filter(|s| s.label as usize == c).collect();
        let mut class_rng = rng.fork(c as u64);
        for _ in 0..budget.synthetic[c - 1] {
            let source = members[class_rng.below(members.len())];
            out.push(synthesize(kind, source, padded, &mut class_rng)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{extract_patch, mirror_pad, HsiCube};
    use proptest::prelude::*;

    #[test]
    fn budget_examples() {
        assert_eq!(compute_budget(&[10, 50, 100]).unwrap().synthetic, vec![10, 50, 0]);
        assert_eq!(compute_budget(&[100]).unwrap().synthetic, vec![0]);
        assert_eq!(compute_budget(&[60, 100]).unwrap().synthetic, vec![40, 0]);
        assert_eq!(compute_budget(&[0, 3]).unwrap().synthetic, vec![0, 0]);
        assert!(compute_budget(&[0, 0]).is_err());
        assert!(compute_budget(&[]).is_err());
    }

    proptest! {
        #[test]
        fn budget_bounds(counts in prop::collection::vec(0usize..500, 1..12)) {
            prop_assume!(counts.iter().any(|&n| n > 0));
            let b = compute_budget(&counts).unwrap();
            let n_max = *counts.iter().max().unwrap();
            for (n, s) in counts.iter().zip(&b.synthetic) {
                prop_assert!(s <= n);
                prop_assert!(n + s <= n_max);
            }
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for k in AugmentationKind::ALL {
            assert_eq!(k.name().parse::<AugmentationKind>().unwrap(), k);
        }
        assert_eq!("Rotate".parse::<AugmentationKind>().unwrap(), AugmentationKind::Rotate);
        assert!("shear".parse::<AugmentationKind>().is_err());
    }

    fn scene_samples(counts: &[usize]) -> (PaddedCube, Vec<Sample>) {
        let mut rng = SeededRng::new(11);
        let cube = HsiCube::from_vec(20, 20, 2, (0..800).map(|_| rng.unit() as f32).collect()).unwrap();
        let padded = mirror_pad(&cube, 5).unwrap();
        let mut samples = Vec::new();
        for (c, &n) in counts.iter().enumerate() {
            for i in 0..n {
                let origin = ((i * 7 + c) % 20, (i * 3 + 2 * c) % 20);
                samples.push(Sample {
                    patch: extract_patch(&padded, origin.0, origin.1, 7).unwrap(),
                    label: c as u16 + 1,
                    origin,
                    synthetic: false,
                });
            }
        }
        (padded, samples)
    }

    #[test]
    fn counts_after_augmentation() {
        let (padded, samples) = scene_samples(&[10, 50, 100]);
        let budget = compute_budget(&class_counts(&samples, 3).unwrap()).unwrap();
        for kind in [AugmentationKind::Rotate, AugmentationKind::Flip, AugmentationKind::Zoom, AugmentationKind::Mixed] {
            let out = augment_training_set(&samples, kind, &padded, &budget, &SeededRng::new(1)).unwrap();
            assert_eq!(class_counts(&out, 3).unwrap(), vec![20, 100, 100]);
            assert_eq!(&out[..samples.len()], samples.as_slice());
            assert!(out[samples.len()..].iter().all(|s| s.synthetic));
            // every synthetic sample keeps the label of a source of the same class
            for s in &out[samples.len()..] {
                assert!(samples.iter().any(|o| o.origin == s.origin && o.label == s.label));
            }
        }
    }

    #[test]
    fn none_is_identity_and_results_are_deterministic() {
        let (padded, samples) = scene_samples(&[3, 6]);
        let budget = compute_budget(&[3, 6]).unwrap();
        let same = augment_training_set(&samples, AugmentationKind::None, &padded, &budget, &SeededRng::new(0)).unwrap();
        assert_eq!(same, samples);
        let a = augment_training_set(&samples, AugmentationKind::Mixed, &padded, &budget, &SeededRng::new(5)).unwrap();
        let b = augment_training_set(&samples, AugmentationKind::Mixed, &padded, &budget, &SeededRng::new(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn inconsistent_budget_rejected() {
        let (padded, samples) = scene_samples(&[3, 6]);
        let budget = compute_budget(&[4, 6]).unwrap();
        assert!(augment_training_set(&samples, AugmentationKind::Flip, &padded, &budget, &SeededRng::new(0)).is_err());
    }
}
