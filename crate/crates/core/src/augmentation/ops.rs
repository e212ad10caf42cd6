//! Spatial patch operations. Patches are `[s, s, bands]` tensors indexed `(x, y, band)`; every
//! operation acts on each band plane identically.

use serde::{Deserialize, Serialize};

use crate::dataset::{extract_patch, Coord, PaddedCube, Sample};
use crate::{Error, Result, Tensor};

pub const ZOOM_MIN: f64 = 1.1;
pub const ZOOM_MAX: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlipAxis {
    /// Reverses the x axis.
    Horizontal,
    /// Reverses the y axis.
    Vertical,
}

/// Smallest odd window side that contains a `patch_size` square under any rotation.
pub fn rotation_window(patch_size: usize) -> usize {
    let side = (patch_size as f64 * std::f64::consts::SQRT_2).ceil() as usize;
    if side % 2 == 0 {
        side + 1
    } else {
        side
    }
}

/// Writes the bilinear interpolation of `src` at fractional `(x, y)` into `out`.
fn bilinear_into(src: &Tensor<f32>, x: f64, y: f64, out: &mut [f32]) {
    let (nx, ny, bands) = (src.shape()[0], src.shape()[1], src.shape()[2]);
    let split = |c: f64, n: usize| -> (usize, f64) {
        if n == 1 {
            return (0, 0.0);
        }
        let i = (c.floor().max(0.0) as usize).min(n - 2);
        (i, c - i as f64)
    };
    let (x0, tx) = split(x, nx);
    let (y0, ty) = split(y, ny);
    let (x1, y1) = ((x0 + 1).min(nx - 1), (y0 + 1).min(ny - 1));
    let data = src.data();
    let at = |x: usize, y: usize| &data[(x * ny + y) * bands..(x * ny + y + 1) * bands];
    let (p00, p01, p10, p11) = (at(x0, y0), at(x0, y1), at(x1, y0), at(x1, y1));
    let w00 = (1.0 - tx) * (1.0 - ty);
    let w01 = (1.0 - tx) * ty;
    let w10 = tx * (1.0 - ty);
    let w11 = tx * ty;
    for l in 0..bands {
        let v = w00 * p00[l] as f64 + w01 * p01[l] as f64 + w10 * p10[l] as f64 + w11 * p11[l] as f64;
        out[l] = v as f32;
    }
}

fn resample(src: &Tensor<f32>, size: usize, coords: impl Fn(f64, f64) -> (f64, f64)) -> Tensor<f32> {
    let bands = src.shape()[2];
    let mut out = Tensor::zeros(&[size, size, bands]).expect("non-empty patch");
    let c = (size / 2) as f64;
    for x in 0..size {
        for y in 0..size {
            let (sx, sy) = coords(x as f64 - c, y as f64 - c);
            let base = (x * size + y) * bands;
            bilinear_into(src, sx, sy, &mut out.data_mut()[base..base + bands]);
        }
    }
    out
}

/// Rotates the neighbourhood of `origin` by `angle` degrees and crops a `patch_size` patch.
///
/// An enlarged `rotation_window` window is read from the padded cube so no rotated corner falls
/// outside the source. Output offset `(u, v)` samples the source at
/// `(cos a * u - sin a * v, sin a * u + cos a * v)` relative to the centre.
pub fn rotate_sample(padded: &PaddedCube, origin: Coord, label: u16, patch_size: usize, angle: f64) -> Result<Sample> {
    let window = rotation_window(patch_size);
    if padded.radius < window / 2 {
        return Err(Error::OutOfBounds(format!(
            "rotation of {patch_size}x{patch_size} patches needs padding {}, have {}",
            window / 2,
            padded.radius
        )));
    }
    let src = extract_patch(padded, origin.0, origin.1, window)?;
    let (sin, cos) = angle.to_radians().sin_cos();
    let c = (window / 2) as f64;
    let patch = resample(&src, patch_size, |u, v| (c + cos * u - sin * v, c + sin * u + cos * v));
    Ok(Sample { patch, label, origin, synthetic: true })
}

pub fn flip_sample(sample: &Sample, axis: FlipAxis) -> Sample {
    let shape = sample.patch.shape();
    let (nx, ny, bands) = (shape[0], shape[1], shape[2]);
    let src = sample.patch.data();
    let mut data = Vec::with_capacity(src.len());
    for x in 0..nx {
        for y in 0..ny {
            let (sx, sy) = match axis {
                FlipAxis::Horizontal => (nx - 1 - x, y),
                FlipAxis::Vertical => (x, ny - 1 - y),
            };
            let base = (sx * ny + sy) * bands;
            data.extend_from_slice(&src[base..base + bands]);
        }
    }
    Sample {
        patch: Tensor::from_vec(shape, data).expect("same shape"),
        label: sample.label,
        origin: sample.origin,
        synthetic: true,
    }
}

/// Zooms in by `factor`: the central `s / factor` sub-window is stretched onto the `s x s` grid.
pub fn zoom_sample(sample: &Sample, factor: f64) -> Result<Sample> {
    if !(ZOOM_MIN..=ZOOM_MAX).contains(&factor) {
        return Err(Error::InvalidRange { lo: ZOOM_MIN, hi: ZOOM_MAX });
    }
    let size = sample.patch.shape()[0];
    if sample.patch.shape()[1] != size {
        return Err(Error::ShapeMismatch(format!("zoom needs a square patch, got {:?}", sample.patch.shape())));
    }
    let c = (size / 2) as f64;
    let patch = resample(&sample.patch, size, |u, v| (c + u / factor, c + v / factor));
    Ok(Sample { patch, label: sample.label, origin: sample.origin, synthetic: true })
}
