//! Run configuration: one flat TOML document holding data paths, split, network, training and
//! augmentation settings. Unknown keys are rejected. Relative paths resolve against the
//! directory of the config file.

use std::fs;
use std::path::{Path, PathBuf};

use hypergrid_core::augmentation::AugmentationKind;
use hypergrid_core::dataset::{generate_patch_splits, load_scene, HsiCube, LabelMap, SplitParams, SplitSpec};
use hypergrid_core::evaluation::{ExperimentConfig, TrainConfig};
use hypergrid_core::network::{AdamConfig, NetworkConfig};
use hypergrid_core::SeededRng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult, IO};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub cube: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    /// Split file; when absent a split is generated from `folds`, `block_size` and `split_seed`.
    pub split: Option<PathBuf>,
    pub method: Option<String>,
    pub dataset: String,
    pub augmentation: AugmentationKind,
    pub base_seed: u64,
    pub runs: usize,

    pub folds: usize,
    pub block_size: usize,
    pub split_seed: u64,

    pub patch_width: usize,
    pub patch_height: usize,
    /// Defaults to the band count of the cube.
    pub bands: Option<usize>,
    /// Defaults to the largest label in the label map.
    pub num_classes: Option<usize>,
    pub num_conv_layers: usize,
    pub kernels_per_layer: usize,
    pub kernel_extent: usize,
    pub dense_widths: Vec<usize>,
    pub per_channel_kernels: bool,

    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub min_improvement: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let net = NetworkConfig::new(1, 2);
        let train = TrainConfig::default();
        let split = SplitParams::default();
        Self {
            cube: None,
            labels: None,
            split: None,
            method: None,
            dataset: "scene".into(),
            augmentation: AugmentationKind::None,
            base_seed: 0,
            runs: 5,
            folds: split.folds,
            block_size: split.block_size,
            split_seed: 0,
            patch_width: net.patch_width,
            patch_height: net.patch_height,
            bands: None,
            num_classes: None,
            num_conv_layers: net.num_conv_layers,
            kernels_per_layer: net.kernels_per_layer,
            kernel_extent: net.kernel_extent,
            dense_widths: net.dense_widths,
            per_channel_kernels: net.per_channel_kernels,
            max_epochs: train.max_epochs,
            patience: train.patience,
            batch_size: train.batch_size,
            learning_rate: train.adam.learning_rate,
            beta1: train.adam.beta1,
            beta2: train.adam.beta2,
            epsilon: train.adam.epsilon,
            min_improvement: train.min_improvement,
        }
    }
}

/// A loaded scene with the split its folds come from.
pub struct Scene {
    pub cube: HsiCube,
    pub labels: LabelMap,
    pub split: SplitSpec,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::usage(format!("invalid config: {}", e.message())))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::new(IO, format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.cube, &mut cfg.labels, &mut cfg.split].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    fn required<'a>(&self, field: &'a Option<PathBuf>, name: &str) -> CliResult<&'a Path> {
        field.as_deref().ok_or_else(|| CliError::usage(format!("config is missing `{name}`")))
    }

    pub fn load_scene(&self) -> CliResult<Scene> {
        let (cube, labels) = load_scene(self.required(&self.cube, "cube")?, self.required(&self.labels, "labels")?)?;
        let split = match &self.split {
            Some(path) => SplitSpec::load(path)?,
            None => generate_patch_splits(
                &labels,
                SplitParams { folds: self.folds, block_size: self.block_size, patch_radius: self.patch_width / 2 },
                &mut SeededRng::new(self.split_seed),
            )?,
        };
        Ok(Scene { cube, labels, split })
    }

    pub fn network(&self, scene: &Scene) -> NetworkConfig {
        NetworkConfig {
            patch_width: self.patch_width,
            patch_height: self.patch_height,
            bands: self.bands.unwrap_or(scene.cube.bands()),
            num_conv_layers: self.num_conv_layers,
            kernels_per_layer: self.kernels_per_layer,
            kernel_extent: self.kernel_extent,
            dense_widths: self.dense_widths.clone(),
            num_classes: self.num_classes.unwrap_or(scene.labels.num_classes()),
            per_channel_kernels: self.per_channel_kernels,
        }
    }

    pub fn experiment(&self, scene: &Scene) -> CliResult<ExperimentConfig> {
        let cfg = ExperimentConfig {
            network: self.network(scene),
            train: TrainConfig {
                max_epochs: self.max_epochs,
                patience: self.patience,
                batch_size: self.batch_size,
                adam: AdamConfig {
                    learning_rate: self.learning_rate,
                    beta1: self.beta1,
                    beta2: self.beta2,
                    epsilon: self.epsilon,
                },
                seed: 0,
                min_improvement: self.min_improvement,
            },
            augmentation: self.augmentation,
            runs: self.runs,
            base_seed: self.base_seed,
            method: self.method.clone().unwrap_or_else(|| format!("cnn-{}", self.augmentation)),
            dataset: self.dataset.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!((cfg.patch_width, cfg.kernels_per_layer, cfg.batch_size, cfg.patience, cfg.max_epochs), (7, 24, 64, 15, 200));
        assert_eq!(cfg.dense_widths, vec![512, 256, 128]);
        assert_eq!(cfg.learning_rate, 1e-4);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = RunConfig::parse("learning_rte = 0.1\n").unwrap_err();
        assert_eq!(err.code, 1);
        assert!(err.message.contains("learning_rte"), "{}", err.message);
    }

    #[test]
    fn overrides_and_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "cube = \"a.hgcube\"\naugmentation = \"rotate\"\ndense_widths = [16]\n").unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.cube, Some(dir.path().join("a.hgcube")));
        assert_eq!(cfg.augmentation, AugmentationKind::Rotate);
        assert_eq!(cfg.dense_widths, vec![16]);
        assert_eq!(RunConfig::load(&dir.path().join("missing.toml")).unwrap_err().code, IO);
    }
}
