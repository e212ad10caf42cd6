//! Mini-batch training with early stopping, and prediction.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::Sample;
use crate::network::{forward, loss_and_gradient, AdamConfig, AdamState, ModelParams, NetworkConfig};
use crate::{Error, Result, SeededRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_epochs: usize,
    /// Consecutive epochs without improvement that end training.
    pub patience: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Seed of the mini-batch shuffling stream.
    pub seed: u64,
    /// An epoch improves only if its loss undercuts the best so far by more than this.
    pub min_improvement: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { max_epochs: 200, patience: 15, batch_size: 64, adam: AdamConfig::default(), seed: 0, min_improvement: 1e-6 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::InvalidConfig("max_epochs and patience must be positive".into()));
        }
        if self.patience > self.max_epochs {
            return Err(Error::InvalidConfig(format!(
                "patience {} exceeds max_epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !(self.min_improvement >= 0.0) {
            return Err(Error::InvalidConfig("min_improvement must be >= 0".into()));
        }
        Ok(())
    }
}

/// Tracks the best epoch loss and how long it has gone unbeaten.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    min_improvement: f64,
    best: f64,
    stale: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize, min_improvement: f64) -> Self {
        Self { patience, min_improvement, best: f64::INFINITY, stale: 0 }
    }

    /// Records one epoch loss; returns true once training should stop.
    pub fn observe(&mut self, loss: f64) -> bool {
        if loss < self.best - self.min_improvement {
            self.best = loss;
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        self.stale >= self.patience
    }
}

/// Number of epochs a loss trace would run for before the stopping rule fires.
pub fn stopping_epoch(trace: &[f64], patience: usize, min_improvement: f64, max_epochs: usize) -> usize {
    let mut rule = EarlyStopping::new(patience, min_improvement);
    for (i, &loss) in trace.iter().enumerate().take(max_epochs) {
        if rule.observe(loss) {
            return i + 1;
        }
    }
    trace.len().min(max_epochs)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters after the final epoch.
    pub params: ModelParams<f32>,
    pub epochs_run: usize,
    /// Mean cross-entropy of every epoch.
    pub loss_trace: Vec<f64>,
    pub training_time_s: f64,
}

fn check_samples(cfg: &NetworkConfig, samples: &[Sample]) -> Result<()> {
    for s in samples {
        if s.label == 0 || s.label as usize > cfg.num_classes {
            return Err(Error::InvalidLabel { label: s.label as usize, classes: cfg.num_classes });
        }
    }
    Ok(())
}

pub fn train(
    cfg: &NetworkConfig,
    mut params: ModelParams<f32>,
    samples: &[Sample],
    tc: &TrainConfig,
) -> Result<TrainOutcome> {
    tc.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptyInput("training set is empty".into()));
    }
    check_samples(cfg, samples)?;
    let start = Instant::now();
    let mut rng = SeededRng::new(tc.seed);
    let mut adam = AdamState::new(tc.adam, &params);
    let mut grads = params.zeros_like();
    let mut rule = EarlyStopping::new(tc.patience, tc.min_improvement);
    let mut loss_trace = Vec::new();
    for _ in 0..tc.max_epochs {
        let order = rng.permutation(samples.len());
        let mut total = 0.0f64;
        for batch in order.chunks(tc.batch_size) {
            grads.fill_zero();
            for &i in batch {
                let s = &samples[i];
                total += loss_and_gradient(&params, cfg, &s.patch, s.label as usize - 1, &mut grads)? as f64;
            }
            grads.scale(1.0 / batch.len() as f32);
            adam.step(&mut params, &grads)?;
        }
        let mean = total / samples.len() as f64;
        loss_trace.push(mean);
        if rule.observe(mean) {
            break;
        }
    }
    Ok(TrainOutcome {
        params,
        epochs_run: loss_trace.len(),
        loss_trace,
        training_time_s: start.elapsed().as_secs_f64(),
    })
}

/// 1-based label of the highest score; ties go to the lowest class.
pub fn argmax_label(scores: &[f32]) -> u16 {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best as u16 + 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub labels: Vec<u16>,
    /// Mean wall-clock latency per sample over the whole pass.
    pub ms_per_sample: f64,
}

pub fn predict(params: &ModelParams<f32>, cfg: &NetworkConfig, samples: &[Sample]) -> Result<Predictions> {
    let start = Instant::now();
    let labels = samples
        .iter()
        .map(|s| forward(params, cfg, &s.patch).map(|scores| argmax_label(&scores)))
        .collect::<Result<Vec<_>>>()?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    Ok(Predictions { labels, ms_per_sample: if samples.is_empty() { 0.0 } else { elapsed / samples.len() as f64 } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::init_params;
    use crate::Tensor;

    fn tiny_cfg() -> NetworkConfig {
        NetworkConfig {
            patch_width: 3,
            patch_height: 3,
            bands: 4,
            num_conv_layers: 1,
            kernels_per_layer: 4,
            kernel_extent: 3,
            dense_widths: vec![8],
            num_classes: 2,
            per_channel_kernels: false,
        }
    }

    fn samples(n: usize, seed: u64) -> Vec<Sample> {
        let mut rng = SeededRng::new(seed);
        (0..n)
            .map(|i| {
                let label = 1 + (i % 2) as u16;
                let shift = if label == 1 { 0.0 } else { 0.6 };
                let data = (0..36).map(|_| (shift + 0.3 * rng.unit()) as f32).collect();
                Sample { patch: Tensor::from_vec(&[3, 3, 4], data).unwrap(), label, origin: (i, 0), synthetic: false }
            })
            .collect()
    }

    #[test]
    fn frozen_model_stops_after_patience_plus_one() {
        let cfg = tiny_cfg();
        let params = init_params(&cfg, &mut SeededRng::new(0)).unwrap();
        let mut tc = TrainConfig { batch_size: 4, ..TrainConfig::default() };
        tc.adam.learning_rate = 0.0;
        let out = train(&cfg, params.clone(), &samples(10, 1), &tc).unwrap();
        assert_eq!(out.epochs_run, 16);
        assert!(out.loss_trace.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(out.params, params);
    }

    #[test]
    fn stopping_rule_matches_scan() {
        let mut rng = SeededRng::new(5);
        for _ in 0..200 {
            let trace: Vec<f64> = (0..60).map(|_| rng.unit()).collect();
            // brute force: first epoch ending a run of `patience` non-improving epochs
            let patience = 1 + rng.below(6);
            let mut expected = trace.len();
            for end in 0..trace.len() {
                let best_before = |i: usize| trace[..i].iter().copied().fold(f64::INFINITY, f64::min);
                let run_ok = end + 1 > patience
                    && (end + 1 - patience..=end).all(|i| !(trace[i] < best_before(i) - 1e-6));
                if run_ok {
                    expected = end + 1;
                    break;
                }
            }
            assert_eq!(stopping_epoch(&trace, patience, 1e-6, 200), expected);
        }
    }

    #[test]
    fn patience_bound_precedes_max_epochs() {
        let flat = vec![1.0; 50];
        assert_eq!(stopping_epoch(&flat, 20, 1e-6, 20), 20);
        assert_eq!(stopping_epoch(&flat, 15, 1e-6, 200), 16);
        assert!(TrainConfig { patience: 20, max_epochs: 20, ..TrainConfig::default() }.validate().is_ok());
        assert!(TrainConfig { patience: 21, max_epochs: 20, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { batch_size: 0, ..TrainConfig::default() }.validate().is_err());
    }

    #[test]
    fn training_is_deterministic_and_learns() {
        let cfg = tiny_cfg();
        let data = samples(40, 2);
        let tc = TrainConfig { max_epochs: 60, batch_size: 8, adam: AdamConfig { learning_rate: 1e-2, ..AdamConfig::default() }, ..TrainConfig::default() };
        let init = init_params(&cfg, &mut SeededRng::new(3)).unwrap();
        let a = train(&cfg, init.clone(), &data, &tc).unwrap();
        let b = train(&cfg, init, &data, &tc).unwrap();
        assert_eq!(a.loss_trace, b.loss_trace);
        assert_eq!(a.params, b.params);
        assert!(a.loss_trace.last().unwrap() < &a.loss_trace[0]);
        let pred = predict(&a.params, &cfg, &data).unwrap();
        let correct = pred.labels.iter().zip(&data).filter(|(p, s)| **p == s.label).count();
        assert!(correct >= 38, "{correct}/40 {:?}", a.loss_trace);
    }

    #[test]
    fn empty_or_bad_training_sets() {
        let cfg = tiny_cfg();
        let params = ModelParams::zeros(&cfg).unwrap();
        assert!(matches!(train(&cfg, params.clone(), &[], &TrainConfig::default()), Err(Error::EmptyInput(_))));
        let mut bad = samples(2, 0);
        bad[0].label = 3;
        assert!(train(&cfg, params, &bad, &TrainConfig::default()).is_err());
    }

    #[test]
    fn argmax_rules() {
        assert_eq!(argmax_label(&[0.1, 0.9, 0.3]), 2);
        assert_eq!(argmax_label(&[0.5, 0.5]), 1);
        let cfg = tiny_cfg();
        let pred = predict(&ModelParams::zeros(&cfg).unwrap(), &cfg, &samples(6, 4)).unwrap();
        assert!(pred.labels.iter().all(|&l| l == pred.labels[0]));
    }
}
