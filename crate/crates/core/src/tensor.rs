//! Dense row-major tensors.
//!
//! Patches use axis order `(x, y, band)` and feature stacks `(channel, x, y, band)`, so the
//! spectral axis is always innermost.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{AddAssign, Range};

use num_traits::{Float, FromPrimitive, ToPrimitive};

use crate::{Error, Result};

/// Floating-point element type. `f32` is used for training, `f64` for gradient verification.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + AddAssign + Sum + Default + Debug + Send + Sync + 'static
{
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite conversion")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T = f32> {
    shape: Vec<usize>,
    data: Vec<T>,
}

fn check_shape(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() || shape.iter().any(|&e| e == 0) {
        return Err(Error::InvalidShape(shape.to_vec()));
    }
    Ok(shape.iter().product())
}

impl<T: Real> Tensor<T> {
    pub fn filled(shape: &[usize], value: T) -> Result<Self> {
        let n = check_shape(shape)?;
        Ok(Self { shape: shape.to_vec(), data: vec![value; n] })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        Self::filled(shape, T::zero())
    }

    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Result<Self> {
        let n = check_shape(shape)?;
        if n != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} holds {n} values, got {}",
                data.len()
            )));
        }
        Ok(Self { shape: shape.to_vec(), data })
    }

    /// A zero tensor with the same shape as `self`.
    pub fn zeros_like(&self) -> Self {
        Self { shape: self.shape.clone(), data: vec![T::zero(); self.data.len()] }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Flat row-major offset of a coordinate.
    pub fn offset(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.shape.len() {
            return Err(Error::OutOfBounds(format!(
                "index {index:?} has rank {}, tensor rank {}",
                index.len(),
                self.shape.len()
            )));
        }
        let mut off = 0;
        for (&i, &e) in index.iter().zip(&self.shape) {
            if i >= e {
                return Err(Error::OutOfBounds(format!("index {index:?} in shape {:?}", self.shape)));
            }
            off = off * e + i;
        }
        Ok(off)
    }

    pub fn get(&self, index: &[usize]) -> Result<T> {
        Ok(self.data[self.offset(index)?])
    }

    pub fn set(&mut self, index: &[usize], value: T) -> Result<()> {
        let off = self.offset(index)?;
        self.data[off] = value;
        Ok(())
    }

    /// Copies the sub-block selected by one half-open range per axis.
    pub fn slice(&self, ranges: &[Range<usize>]) -> Result<Self> {
        if ranges.len() != self.shape.len() {
            return Err(Error::OutOfBounds(format!(
                "{} ranges for rank-{} tensor",
                ranges.len(),
                self.shape.len()
            )));
        }
        for (r, &e) in ranges.iter().zip(&self.shape) {
            if r.start >= r.end || r.end > e {
                return Err(Error::OutOfBounds(format!("range {r:?} on axis of extent {e}")));
            }
        }
        let out_shape: Vec<usize> = ranges.iter().map(|r| r.end - r.start).collect();
        let n: usize = out_shape.iter().product();
        let mut data = Vec::with_capacity(n);
        // strides of the source
        let mut strides = vec![1; self.shape.len()];
        for a in (0..self.shape.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * self.shape[a + 1];
        }
        let last = ranges.len() - 1;
        let mut cursor: Vec<usize> = ranges.iter().map(|r| r.start).collect();
        loop {
            let base: usize = cursor.iter().zip(&strides).map(|(c, s)| c * s).sum();
            data.extend_from_slice(&self.data[base..base + out_shape[last]]);
            // advance every axis but the innermost
            let mut axis = last;
            loop {
                if axis == 0 {
                    return Ok(Self { shape: out_shape, data });
                }
                axis -= 1;
                cursor[axis] += 1;
                if cursor[axis] < ranges[axis].end {
                    break;
                }
                cursor[axis] = ranges[axis].start;
            }
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { shape: self.shape.clone(), data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn cast<U: Real>(&self) -> Tensor<U> {
        Tensor { shape: self.shape.clone(), data: self.data.iter().map(|v| U::of(v.as_f64())).collect() }
    }
}
