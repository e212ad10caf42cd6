//! Cross-validation driver: every (fold, run) cell normalises, augments, trains and scores.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::augmentation::{augment_training_set, class_counts, compute_budget, rotation_window, AugmentationBudget, AugmentationKind};
use crate::dataset::{apply_normalization, extract_patch, fit_normalization, mirror_pad, Coord, HsiCube, LabelMap, NormalizationStats, PaddedCube, Sample, SplitSpec};
use crate::evaluation::metrics::{confusion, metrics, Metrics};
use crate::evaluation::train::{predict, train, TrainConfig};
use crate::network::{init_params, ModelParams, NetworkConfig};
use crate::rng::derive_seed;
use crate::{Error, Result, SeededRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub network: NetworkConfig,
    pub train: TrainConfig,
    pub augmentation: AugmentationKind,
    pub runs: usize,
    pub base_seed: u64,
    pub method: String,
    pub dataset: String,
}

impl ExperimentConfig {
    pub fn new(network: NetworkConfig, augmentation: AugmentationKind) -> Self {
        Self {
            network,
            train: TrainConfig::default(),
            augmentation,
            runs: 5,
            base_seed: 0,
            method: format!("cnn-{augmentation}"),
            dataset: "scene".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.train.validate()?;
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be >= 1".into()));
        }
        let n = &self.network;
        if n.patch_width != n.patch_height || n.patch_width % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "patches must be square with odd side, got {}x{}",
                n.patch_width, n.patch_height
            )));
        }
        Ok(())
    }
}

/// Seeds of one cell's independent random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellSeeds {
    pub init: u64,
    pub augment: u64,
    pub shuffle: u64,
}

impl CellSeeds {
    pub fn new(base: u64, fold: usize, run: usize) -> Self {
        let h = derive_seed(base, &[fold as u64, run as u64]);
        Self { init: derive_seed(h, &[1]), augment: derive_seed(h, &[2]), shuffle: derive_seed(h, &[3]) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub fold: usize,
    pub run: usize,
    pub metrics: Metrics,
    pub training_time_s: f64,
    pub inference_time_ms: f64,
    pub epochs: usize,
}

/// Inputs of one cell after normalisation and augmentation.
#[derive(Debug, Clone)]
pub struct CellData {
    pub stats: NormalizationStats,
    pub padded: PaddedCube,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    pub budget: AugmentationBudget,
    /// Originals followed by the synthetic samples.
    pub augmented: Vec<Sample>,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub report: MetricsReport,
    pub params: ModelParams<f32>,
    pub loss_trace: Vec<f64>,
    /// Overall accuracy on the original (non-synthetic) training samples.
    pub train_oa: f64,
}

/// Padding wide enough for plain extraction and for the enlarged rotation window.
pub fn padding_radius(patch: usize) -> usize {
    (patch / 2).max(rotation_window(patch) / 2)
}

fn samples_at(padded: &PaddedCube, labels: &LabelMap, coords: &[Coord], size: usize) -> Result<Vec<Sample>> {
    coords
        .iter()
        .map(|&(x, y)| {
            Ok(Sample { patch: extract_patch(padded, x, y, size)?, label: labels.get(x, y), origin: (x, y), synthetic: false })
        })
        .collect()
}

fn check_inputs(cube: &HsiCube, labels: &LabelMap, split: &SplitSpec, cfg: &ExperimentConfig) -> Result<()> {
    cfg.validate()?;
    labels.check_matches(cube)?;
    if (split.width, split.height) != (labels.width(), labels.height()) {
        return Err(Error::DimensionMismatch {
            cube: (labels.width(), labels.height()),
            labels: (split.width, split.height),
        });
    }
    if cube.bands() != cfg.network.bands {
        return Err(Error::InvalidConfig(format!("scene has {} bands, network expects {}", cube.bands(), cfg.network.bands)));
    }
    if labels.num_classes() > cfg.network.num_classes {
        return Err(Error::InvalidLabel { label: labels.num_classes(), classes: cfg.network.num_classes });
    }
    Ok(())
}

pub fn prepare_cell(
    cube: &HsiCube,
    labels: &LabelMap,
    split: &SplitSpec,
    fold: usize,
    run: usize,
    cfg: &ExperimentConfig,
) -> Result<CellData> {
    check_inputs(cube, labels, split, cfg)?;
    let f = split
        .folds
        .get(fold)
        .ok_or_else(|| Error::OutOfBounds(format!("fold {fold} of {}", split.folds.len())))?;
    if f.train.is_empty() {
        return Err(Error::EmptyInput(format!("fold {fold} has no training pixels")));
    }
    let size = cfg.network.patch_width;
    let stats = fit_normalization(cube, &f.train)?;
    let padded = mirror_pad(&apply_normalization(cube, &stats)?, padding_radius(size))?;
    let train = samples_at(&padded, labels, &f.train, size)?;
    let test = samples_at(&padded, labels, &f.test, size)?;
    let budget = compute_budget(&class_counts(&train, cfg.network.num_classes)?)?;
    let seeds = CellSeeds::new(cfg.base_seed, fold, run);
    let augmented = augment_training_set(&train, cfg.augmentation, &padded, &budget, &SeededRng::new(seeds.augment))?;
    Ok(CellData { stats, padded, train, test, budget, augmented })
}

pub fn run_cell(
    cube: &HsiCube,
    labels: &LabelMap,
    split: &SplitSpec,
    fold: usize,
    run: usize,
    cfg: &ExperimentConfig,
) -> Result<CellResult> {
    let data = prepare_cell(cube, labels, split, fold, run, cfg)?;
    let seeds = CellSeeds::new(cfg.base_seed, fold, run);
    let params = init_params(&cfg.network, &mut SeededRng::new(seeds.init))?;
    let tc = TrainConfig { seed: seeds.shuffle, ..cfg.train.clone() };
    let outcome = train(&cfg.network, params, &data.augmented, &tc)?;

    let classes = cfg.network.num_classes;
    let truth = |s: &[Sample]| s.iter().map(|s| s.label).collect::<Vec<_>>();
    let pred = predict(&outcome.params, &cfg.network, &data.test)?;
    let m = metrics(&confusion(&truth(&data.test), &pred.labels, classes)?)?;
    let train_pred = predict(&outcome.params, &cfg.network, &data.train)?;
    let train_oa = metrics(&confusion(&truth(&data.train), &train_pred.labels, classes)?)?.oa;
    Ok(CellResult {
        report: MetricsReport {
            fold,
            run,
            metrics: m,
            training_time_s: outcome.training_time_s,
            inference_time_ms: pred.ms_per_sample,
            epochs: outcome.epochs_run,
        },
        params: outcome.params,
        loss_trace: outcome.loss_trace,
        train_oa,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (zero for a single value).
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub method: String,
    pub dataset: String,
    pub classes: usize,
    /// Sorted by `(fold, run)`.
    pub reports: Vec<MetricsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub reports: usize,
    pub oa: MeanStd,
    pub aa: MeanStd,
    pub kappa: MeanStd,
    pub training_time_s: MeanStd,
    pub inference_time_ms: MeanStd,
}

impl ExperimentResult {
    pub fn summary(&self) -> Result<ExperimentSummary> {
        if self.reports.is_empty() {
            return Err(Error::EmptyInput("no reports to summarise".into()));
        }
        let col = |f: &dyn Fn(&MetricsReport) -> f64| MeanStd::of(&self.reports.iter().map(f).collect::<Vec<_>>());
        Ok(ExperimentSummary {
            reports: self.reports.len(),
            oa: col(&|r| r.metrics.oa),
            aa: col(&|r| r.metrics.aa),
            kappa: col(&|r| r.metrics.kappa),
            training_time_s: col(&|r| r.training_time_s),
            inference_time_ms: col(&|r| r.inference_time_ms),
        })
    }
}

/// Runs all `folds x runs` cells on up to `threads` workers. Cells are independent and seeded
/// by `(base_seed, fold, run)`, so the reports do not depend on `threads`.
pub fn run_experiment(
    cube: &HsiCube,
    labels: &LabelMap,
    split: &SplitSpec,
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<ExperimentResult> {
    check_inputs(cube, labels, split, cfg)?;
    let cells: Vec<(usize, usize)> =
        (0..split.folds.len()).flat_map(|f| (0..cfg.runs).map(move |r| (f, r))).collect();
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(cells.len()));
    let worker = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        let Some(&(fold, run)) = cells.get(i) else { break };
        let out = run_cell(cube, labels, split, fold, run, cfg).map(|c| c.report);
        let failed = out.is_err();
        done.lock().expect("worker panicked").push(out);
        if failed {
            next.store(cells.len(), Ordering::Relaxed);
        }
    };
    let threads = threads.clamp(1, cells.len().max(1));
    if threads == 1 {
        worker();
    } else {
        thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(worker);
            }
        });
    }
    let mut reports = done.into_inner().expect("worker panicked").into_iter().collect::<Result<Vec<_>>>()?;
    reports.sort_by_key(|r| (r.fold, r.run));
    Ok(ExperimentResult {
        method: cfg.method.clone(),
        dataset: cfg.dataset.clone(),
        classes: cfg.network.num_classes,
        reports,
    })
}
