use serde::{Deserialize, Serialize};

use crate::dataset::{Coord, HsiCube};
use crate::{Error, Result};

/// Per-band minimum and maximum over a set of training pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub min: Vec<f32>,
    pub max: Vec<f32>,
}

pub fn fit_normalization(cube: &HsiCube, train_coords: &[Coord]) -> Result<NormalizationStats> {
    if train_coords.is_empty() {
        return Err(Error::EmptyInput("normalisation needs at least one training pixel".into()));
    }
    let b = cube.bands();
    let mut min = vec![f32::INFINITY; b];
    let mut max = vec![f32::NEG_INFINITY; b];
    for &(x, y) in train_coords {
        if x >= cube.width() || y >= cube.height() {
            return Err(Error::OutOfBounds(format!("training pixel ({x}, {y}) outside the scene")));
        }
        for (i, &v) in cube.spectrum(x, y).iter().enumerate() {
            min[i] = min[i].min(v);
            max[i] = max[i].max(v);
        }
    }
    Ok(NormalizationStats { min, max })
}

/// Maps each band linearly so the training range becomes `[0, 1]`. Values outside the training
/// range are not clipped; constant bands map to 0.
pub fn apply_normalization(cube: &HsiCube, stats: &NormalizationStats) -> Result<HsiCube> {
    let b = cube.bands();
    if stats.min.len() != b || stats.max.len() != b {
        return Err(Error::ShapeMismatch(format!("stats for {} bands, cube has {b}", stats.min.len())));
    }
    let mut out = cube.clone();
    for spectrum in out.values_mut().chunks_exact_mut(b) {
        for (i, v) in spectrum.iter_mut().enumerate() {
            let (lo, hi) = (stats.min[i] as f64, stats.max[i] as f64);
            *v = if hi > lo { ((*v as f64 - lo) / (hi - lo)) as f32 } else { 0.0 };
        }
    }
    Ok(out)
}
