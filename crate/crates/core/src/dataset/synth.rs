//! Synthetic scenes with known class structure.

use crate::dataset::{HsiCube, LabelMap};
use crate::{Error, Result, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    pub classes: usize,
    /// Standard deviation of the iid Gaussian noise added to every value.
    pub noise: f64,
}

#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub cube: HsiCube,
    pub labels: LabelMap,
    /// Noise-free spectrum of every class (index `c - 1`).
    pub prototypes: Vec<Vec<f32>>,
}

/// Smallest RMS distance accepted between two prototypes.
const MIN_SEPARATION: f64 = 0.08;

fn prototype(bands: usize, rng: &mut SeededRng) -> Vec<f64> {
    let b = bands as f64;
    let base = 0.1 + 0.2 * rng.unit();
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| (b * rng.unit(), 1.0 + b * (0.08 + 0.12 * rng.unit()), 0.2 + 0.5 * rng.unit()))
        .collect();
    (0..bands)
        .map(|l| {
            let l = l as f64;
            base + bumps.iter().map(|&(mu, w, a)| a * (-0.5 * ((l - mu) / w).powi(2)).exp()).sum::<f64>()
        })
        .collect()
}

fn rms(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

/// Generates a scene of Voronoi class regions with smooth spectral prototypes.
///
/// Class regions grow from `3 * classes` random seed points (every class owns at least one);
/// one background row and column (label 0) are drawn when the scene is at least 4 pixels on that
/// side. Every pixel is its prototype plus `N(0, noise^2)` per band.
pub fn synth_scene(params: SynthParams, rng: &mut SeededRng) -> Result<SyntheticScene> {
    let SynthParams { width: w, height: h, bands, classes, noise } = params;
    if classes < 2 || classes > u16::MAX as usize {
        return Err(Error::InvalidConfig(format!("need 2..=65535 classes, got {classes}")));
    }
    if bands == 0 || w == 0 || h == 0 {
        return Err(Error::InvalidConfig("scene extents and bands must be positive".into()));
    }
    if w * h < 10 * classes {
        return Err(Error::InvalidConfig(format!("{w}x{h} scene too small for {classes} classes")));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidConfig(format!("noise must be finite and >= 0, got {noise}")));
    }

    let mut protos: Vec<Vec<f64>> = Vec::with_capacity(classes + 1);
    for _ in 0..=classes {
        let mut candidate = prototype(bands, rng);
        for _ in 0..200 {
            if protos.iter().all(|p| rms(p, &candidate) >= MIN_SEPARATION) {
                break;
            }
            candidate = prototype(bands, rng);
        }
        protos.push(candidate);
    }
    // protos[0] is the background spectrum

    let strip_y = (h >= 4).then(|| rng.below(h));
    let strip_x = (w >= 4).then(|| rng.below(w));
    let background = |x: usize, y: usize| Some(x) == strip_x || Some(y) == strip_y;
    let mut free: Vec<(usize, usize)> =
        (0..w).flat_map(|x| (0..h).map(move |y| (x, y))).filter(|&(x, y)| !background(x, y)).collect();
    rng.shuffle_slice(&mut free);
    let n_seeds = (3 * classes).min(free.len());
    let mut seed_class: Vec<u16> = (0..n_seeds).map(|i| (i % classes) as u16 + 1).collect();
    rng.shuffle_slice(&mut seed_class);
    let seeds = &free[..n_seeds];

    let mut labels = vec![0u16; w * h];
    for x in 0..w {
        for y in 0..h {
            if background(x, y) {
                continue;
            }
            let nearest = seeds
                .iter()
                .enumerate()
                .min_by_key(|(_, &(sx, sy))| sx.abs_diff(x).pow(2) + sy.abs_diff(y).pow(2))
                .map(|(i, _)| i)
                .expect("at least one seed");
            labels[x * h + y] = seed_class[nearest];
        }
    }

    let mut values = Vec::with_capacity(w * h * bands);
    for &l in &labels {
        let proto = &protos[l as usize];
        for &p in proto {
            let v = if noise > 0.0 { p + noise * rng.normal() } else { p };
            values.push(v as f32);
        }
    }
    Ok(SyntheticScene {
        cube: HsiCube::from_vec(w, h, bands, values)?,
        labels: LabelMap::new(w, h, labels)?,
        prototypes: protos[1..].iter().map(|p| p.iter().map(|&v| v as f32).collect()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(noise: f64) -> SynthParams {
        SynthParams { width: 30, height: 20, bands: 16, classes: 5, noise }
    }

    #[test]
    fn noiseless_classes_share_spectra() {
        let s = synth_scene(params(0.0), &mut SeededRng::new(1)).unwrap();
        for x in 0..30 {
            for y in 0..20 {
                let l = s.labels.get(x, y);
                if l > 0 {
                    assert_eq!(s.cube.spectrum(x, y), s.prototypes[l as usize - 1].as_slice());
                }
            }
        }
    }

    #[test]
    fn every_class_present_and_background_exists() {
        for seed in 0..20 {
            let s = synth_scene(params(0.05), &mut SeededRng::new(seed)).unwrap();
            assert_eq!(s.labels.num_classes(), 5);
            assert!(s.labels.class_counts().iter().all(|&c| c > 0));
            assert!(s.labels.labels().contains(&0));
        }
    }

    #[test]
    fn nearest_prototype_classifies_low_noise_scene() {
        let s = synth_scene(params(0.01), &mut SeededRng::new(2)).unwrap();
        let labeled = s.labels.labeled();
        let correct = labeled
            .iter()
            .filter(|&&(x, y)| {
                let spec = s.cube.spectrum(x, y);
                let dist = |p: &Vec<f32>| spec.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum::<f32>();
                let best = (0..s.prototypes.len())
                    .min_by(|&a, &b| dist(&s.prototypes[a]).total_cmp(&dist(&s.prototypes[b])))
                    .unwrap();
                best as u16 + 1 == s.labels.get(x, y)
            })
            .count();
        assert_eq!(correct, labeled.len());
    }

    #[test]
    fn infeasible_geometry() {
        let mut rng = SeededRng::new(0);
        assert!(synth_scene(SynthParams { width: 3, height: 3, bands: 4, classes: 2, noise: 0.0 }, &mut rng).is_err());
        assert!(synth_scene(SynthParams { width: 5, height: 4, bands: 4, classes: 2, noise: 0.0 }, &mut rng).is_ok());
        assert!(synth_scene(SynthParams { classes: 1, ..params(0.0) }, &mut rng).is_err());
        assert!(synth_scene(SynthParams { bands: 0, ..params(0.0) }, &mut rng).is_err());
    }

    #[test]
    fn deterministic() {
        let a = synth_scene(params(0.05), &mut SeededRng::new(7)).unwrap();
        let b = synth_scene(params(0.05), &mut SeededRng::new(7)).unwrap();
        assert_eq!(a.cube, b.cube);
        assert_eq!(a.labels, b.labels);
    }
}
