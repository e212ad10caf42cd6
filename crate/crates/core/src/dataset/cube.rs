use serde::{Deserialize, Serialize};

use crate::{Error, Result, Tensor};

/// Spatial pixel coordinate `(x, y)`.
pub type Coord = (usize, usize);

/// Reflectance cube stored `(x, y, band)` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HsiCube {
    data: Tensor<f32>,
}

impl HsiCube {
    pub fn new(data: Tensor<f32>) -> Result<Self> {
        if data.rank() != 3 {
            return Err(Error::ShapeMismatch(format!("cube must be (W, H, B), got {:?}", data.shape())));
        }
        if data.data().iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("cube contains non-finite reflectance".into()));
        }
        Ok(Self { data })
    }

    pub fn from_vec(width: usize, height: usize, bands: usize, values: Vec<f32>) -> Result<Self> {
        Self::new(Tensor::from_vec(&[width, height, bands], values)?)
    }

    pub fn width(&self) -> usize {
        self.data.shape()[0]
    }

    pub fn height(&self) -> usize {
        self.data.shape()[1]
    }

    pub fn bands(&self) -> usize {
        self.data.shape()[2]
    }

    pub fn tensor(&self) -> &Tensor<f32> {
        &self.data
    }

    pub fn values(&self) -> &[f32] {
        self.data.data()
    }

    pub fn values_mut(&mut self) -> &mut [f32] {
        self.data.data_mut()
    }

    pub fn spectrum(&self, x: usize, y: usize) -> &[f32] {
        let b = self.bands();
        &self.data.data()[(x * self.height() + y) * b..][..b]
    }
}

/// Class raster; 0 marks unlabeled pixels, classes are `1..=num_classes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u16>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidShape(vec![width, height]));
        }
        if labels.len() != width * height {
            return Err(Error::SizeMismatch { expected: width * height, found: labels.len() });
        }
        Ok(Self { width, height, labels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.labels[x * self.height + y]
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().copied().max().unwrap_or(0) as usize
    }

    /// All labeled coordinates in `(x, y)` lexicographic order.
    pub fn labeled(&self) -> Vec<Coord> {
        (0..self.width)
            .flat_map(|x| (0..self.height).map(move |y| (x, y)))
            .filter(|&(x, y)| self.get(x, y) != 0)
            .collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &l in &self.labels {
            if l > 0 {
                counts[l as usize - 1] += 1;
            }
        }
        counts
    }

    pub fn check_matches(&self, cube: &HsiCube) -> Result<()> {
        if (self.width, self.height) != (cube.width(), cube.height()) {
            return Err(Error::DimensionMismatch {
                cube: (cube.width(), cube.height()),
                labels: (self.width, self.height),
            });
        }
        Ok(())
    }
}

/// One training or test patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    #[serde(skip)]
    pub patch: Tensor<f32>,
    /// Class id in `1..=num_classes`.
    pub label: u16,
    pub origin: Coord,
    pub synthetic: bool,
}

impl Default for Tensor<f32> {
    fn default() -> Self {
        Tensor::zeros(&[1]).expect("unit tensor")
    }
}
