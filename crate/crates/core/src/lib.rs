//! Hyperspectral patch classification toolkit.
//!
//! The crate is organised bottom-up:
//!
//! - [`tensor`] and [`rng`]: dense row-major tensors and a reproducible seeded generator.
//! - [`network`]: the spectral-spatial 3D convolutional network, its loss, Adam, checkpoints
//!   and finite-difference gradient verification.
//! - [`dataset`]: scene storage, mirror padding, patch extraction, normalisation, synthetic
//!   scenes and leakage-free block splits.
//! - [`augmentation`]: patch rotation, flipping, zooming and the class-balance budget.
//! - [`evaluation`]: the training loop, metrics, Wilcoxon signed-rank tests, average ranks and
//!   the cross-validation driver.

pub mod augmentation;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod network;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};
pub use rng::SeededRng;
pub use tensor::{Real, Tensor};
