//! Scenes, patches, normalisation, synthetic data and leakage-free cross-validation splits.

pub mod cube;
pub mod io;
pub mod normalize;
pub mod padding;
pub mod split;
pub mod synth;

pub use cube::{Coord, HsiCube, LabelMap, Sample};
pub use io::{load_scene, read_cube, read_labels, save_scene, write_cube, write_labels};
pub use normalize::{apply_normalization, fit_normalization, NormalizationStats};
pub use padding::{extract_patch, mirror_pad, reflect_index, PaddedCube};
pub use split::{generate_patch_splits, verify_no_leakage, Fold, LeakageReport, SplitParams, SplitSpec};
pub use synth::{synth_scene, SynthParams, SyntheticScene};
