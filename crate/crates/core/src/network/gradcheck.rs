//! Finite-difference verification of the analytic gradients.

use crate::network::model::{loss, loss_and_gradient};
use crate::network::{init_params, ModelParams, NetworkConfig};
use crate::{Result, SeededRng, Tensor};

/// `|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Block index (see [`ModelParams::blocks`]) and offset of the worst coordinate.
    pub worst_block: usize,
    pub worst_offset: usize,
    pub worst_analytic: f64,
    pub worst_numeric: f64,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.max_relative_error < tolerance
    }
}

/// The canonical tiny network: 5x5 patches, 9 bands, 2 conv layers of 2 kernels, dense [8, 4],
/// 3 classes.
pub fn canonical_config() -> NetworkConfig {
    NetworkConfig {
        patch_width: 5,
        patch_height: 5,
        bands: 9,
        num_conv_layers: 2,
        kernels_per_layer: 2,
        kernel_extent: 3,
        dense_widths: vec![8, 4],
        num_classes: 3,
        per_channel_kernels: false,
    }
}

/// Central differences `(L(p + eps) - L(p - eps)) / 2 eps` for every parameter.
pub fn numeric_gradient(
    params: &ModelParams<f64>,
    cfg: &NetworkConfig,
    patch: &Tensor<f64>,
    target: usize,
    eps: f64,
) -> Result<ModelParams<f64>> {
    let mut probe = params.clone();
    let mut numeric = params.zeros_like();
    let n_blocks = params.blocks().len();
    for b in 0..n_blocks {
        for i in 0..params.blocks()[b].len() {
            let original = probe.blocks()[b].data()[i];
            probe.blocks_mut()[b].data_mut()[i] = original + eps;
            let plus = loss(&probe, cfg, patch, target)?;
            probe.blocks_mut()[b].data_mut()[i] = original - eps;
            let minus = loss(&probe, cfg, patch, target)?;
            probe.blocks_mut()[b].data_mut()[i] = original;
            numeric.blocks_mut()[b].data_mut()[i] = (plus - minus) / (2.0 * eps);
        }
    }
    Ok(numeric)
}

pub fn analytic_gradient(
    params: &ModelParams<f64>,
    cfg: &NetworkConfig,
    patch: &Tensor<f64>,
    target: usize,
) -> Result<ModelParams<f64>> {
    let mut grads = params.zeros_like();
    loss_and_gradient(params, cfg, patch, target, &mut grads)?;
    Ok(grads)
}

/// Compares a supplied analytic gradient against central differences.
pub fn compare_gradients(analytic: &ModelParams<f64>, numeric: &ModelParams<f64>) -> Result<GradCheckReport> {
    analytic.check_shape(numeric)?;
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst_block: 0,
        worst_offset: 0,
        worst_analytic: 0.0,
        worst_numeric: 0.0,
        checked: 0,
    };
    for (b, (ga, gn)) in analytic.blocks().iter().zip(numeric.blocks()).enumerate() {
        for (i, (&a, &n)) in ga.data().iter().zip(gn.data()).enumerate() {
            report.checked += 1;
            let err = relative_error(a, n);
            if err > report.max_relative_error {
                report.max_relative_error = err;
                report.worst_block = b;
                report.worst_offset = i;
                report.worst_analytic = a;
                report.worst_numeric = n;
            }
        }
    }
    Ok(report)
}

pub fn gradient_check(
    params: &ModelParams<f64>,
    cfg: &NetworkConfig,
    patch: &Tensor<f64>,
    target: usize,
    eps: f64,
) -> Result<GradCheckReport> {
    let analytic = analytic_gradient(params, cfg, patch, target)?;
    let numeric = numeric_gradient(params, cfg, patch, target, eps)?;
    compare_gradients(&analytic, &numeric)
}

/// Random parameters, patch and label for the canonical config, all derived from `seed`.
pub fn canonical_problem(seed: u64) -> Result<(NetworkConfig, ModelParams<f64>, Tensor<f64>, usize)> {
    let cfg = canonical_config();
    let rng = SeededRng::new(seed);
    let params = init_params(&cfg, &mut rng.fork(0))?;
    let mut data_rng = rng.fork(1);
    let n = cfg.patch_width * cfg.patch_height * cfg.bands;
    let data: Vec<f64> = (0..n).map(|_| data_rng.unit()).collect();
    let patch = Tensor::from_vec(&[cfg.patch_width, cfg.patch_height, cfg.bands], data)?;
    let target = data_rng.below(cfg.num_classes);
    Ok((cfg, params, patch, target))
}

pub fn canonical_gradient_check(seed: u64, eps: f64) -> Result<GradCheckReport> {
    let (cfg, params, patch, target) = canonical_problem(seed)?;
    gradient_check(&params, &cfg, &patch, target, eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_passes() {
        let report = canonical_gradient_check(0, 1e-5).unwrap();
        assert!(report.passed(1e-4), "{report:?}");
        assert_eq!(report.checked, canonical_config().param_count());
    }

    #[test]
    fn randomised_configs_pass() {
        for seed in 1..6 {
            let report = canonical_gradient_check(seed, 1e-5).unwrap();
            assert!(report.passed(1e-4), "seed {seed}: {report:?}");
        }
        let (cfg, _, patch, target) = canonical_problem(3).unwrap();
        let cfg = NetworkConfig { per_channel_kernels: true, ..cfg };
        let params = init_params(&cfg, &mut SeededRng::new(7)).unwrap();
        assert!(gradient_check(&params, &cfg, &patch, target, 1e-5).unwrap().passed(1e-4));
    }

    #[test]
    fn corrupted_gradient_detected() {
        let (cfg, params, patch, target) = canonical_problem(0).unwrap();
        let mut analytic = analytic_gradient(&params, &cfg, &patch, target).unwrap();
        analytic.conv[1].weights.data_mut()[5] *= 1.5;
        let numeric = numeric_gradient(&params, &cfg, &patch, target, 1e-5).unwrap();
        let report = compare_gradients(&analytic, &numeric).unwrap();
        assert!(!report.passed(1e-4));
        assert_eq!((report.worst_block, report.worst_offset), (2, 5));
    }

    #[test]
    fn relative_error_definition() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert!((relative_error(1.0, 1.1) - 0.1 / 1.1).abs() < 1e-15);
        assert!((relative_error(1e-10, 0.0) - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn truncation_error_is_second_order() {
        // the output bias enters only through the softmax, so the loss is smooth in it
        let (cfg, params, patch, target) = canonical_problem(0).unwrap();
        let analytic = analytic_gradient(&params, &cfg, &patch, target).unwrap();
        let out = params.dense.len() - 1;
        let block = params.blocks().len() - 1;
        for i in 0..cfg.num_classes {
            let residual = |eps: f64| {
                let mut p = params.clone();
                p.dense[out].biases.data_mut()[i] += eps;
                let plus = loss(&p, &cfg, &patch, target).unwrap();
                p.dense[out].biases.data_mut()[i] -= 2.0 * eps;
                let minus = loss(&p, &cfg, &patch, target).unwrap();
                ((plus - minus) / (2.0 * eps) - analytic.blocks()[block].data()[i]).abs()
            };
            let ratio = residual(2e-2) / residual(1e-2);
            assert!((3.5..4.5).contains(&ratio), "class {i}: ratio {ratio}");
        }
    }
}
