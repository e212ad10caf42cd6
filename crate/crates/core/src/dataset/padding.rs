use crate::dataset::HsiCube;
use crate::{Error, Result, Tensor};

/// Reflect-without-repeat index into `0..n`: `-1 -> 1`, `n -> n - 2`.
pub fn reflect_index(i: isize, n: usize) -> usize {
    let n = n as isize;
    let r = if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    };
    r as usize
}

/// A cube mirror-padded by `radius` pixels on every spatial side.
#[derive(Debug, Clone, PartialEq)]
pub struct PaddedCube {
    pub cube: HsiCube,
    pub radius: usize,
}

impl PaddedCube {
    pub fn original_width(&self) -> usize {
        self.cube.width() - 2 * self.radius
    }

    pub fn original_height(&self) -> usize {
        self.cube.height() - 2 * self.radius
    }

    pub fn bands(&self) -> usize {
        self.cube.bands()
    }
}

pub fn mirror_pad(cube: &HsiCube, radius: usize) -> Result<PaddedCube> {
    let (w, h, b) = (cube.width(), cube.height(), cube.bands());
    if radius >= w.min(h) {
        return Err(Error::InvalidRadius { radius, width: w, height: h });
    }
    let (pw, ph) = (w + 2 * radius, h + 2 * radius);
    let mut values = Vec::with_capacity(pw * ph * b);
    for px in 0..pw {
        let x = reflect_index(px as isize - radius as isize, w);
        for py in 0..ph {
            let y = reflect_index(py as isize - radius as isize, h);
            values.extend_from_slice(cube.spectrum(x, y));
        }
    }
    Ok(PaddedCube { cube: HsiCube::from_vec(pw, ph, b, values)?, radius })
}

/// The `size x size x bands` window centred on original pixel `(x, y)`; `size` must be odd.
pub fn extract_patch(padded: &PaddedCube, x: usize, y: usize, size: usize) -> Result<Tensor<f32>> {
    if size % 2 == 0 {
        return Err(Error::InvalidConfig(format!("patch size {size} must be odd")));
    }
    let half = size / 2;
    if half > padded.radius {
        return Err(Error::OutOfBounds(format!("patch size {size} needs padding {half}, have {}", padded.radius)));
    }
    if x >= padded.original_width() || y >= padded.original_height() {
        return Err(Error::OutOfBounds(format!("pixel ({x}, {y}) outside the scene")));
    }
    let (cx, cy) = (x + padded.radius, y + padded.radius);
    padded.cube.tensor().slice(&[cx - half..cx + half + 1, cy - half..cy + half + 1, 0..padded.bands()])
}
