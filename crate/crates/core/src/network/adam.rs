use serde::{Deserialize, Serialize};

use crate::network::ModelParams;
use crate::{Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-4, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Adam moments mirroring a parameter set.
#[derive(Debug, Clone)]
pub struct AdamState<T = f32> {
    pub config: AdamConfig,
    pub step: u64,
    pub m: ModelParams<T>,
    pub v: ModelParams<T>,
}

impl<T: Real> AdamState<T> {
    pub fn new(config: AdamConfig, params: &ModelParams<T>) -> Self {
        Self { config, step: 0, m: params.zeros_like(), v: params.zeros_like() }
    }

    pub fn step(&mut self, params: &mut ModelParams<T>, grads: &ModelParams<T>) -> Result<()> {
        params.check_shape(grads)?;
        params.check_shape(&self.m)?;
        self.step += 1;
        let coeffs = Coefficients::new(&self.config, self.step);
        let grads = grads.blocks();
        let ms = self.m.blocks_mut();
        let vs = self.v.blocks_mut();
        for (((p, g), m), v) in params.blocks_mut().into_iter().zip(grads).zip(ms).zip(vs) {
            update(p.data_mut(), g.data(), m.data_mut(), v.data_mut(), &coeffs);
        }
        Ok(())
    }
}

struct Coefficients<T> {
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
    correction1: T,
    correction2: T,
}

impl<T: Real> Coefficients<T> {
    fn new(cfg: &AdamConfig, step: u64) -> Self {
        let t = step as i32;
        Self {
            lr: T::of(cfg.learning_rate),
            beta1: T::of(cfg.beta1),
            beta2: T::of(cfg.beta2),
            eps: T::of(cfg.epsilon),
            correction1: T::of(1.0 - cfg.beta1.powi(t)),
            correction2: T::of(1.0 - cfg.beta2.powi(t)),
        }
    }
}

fn update<T: Real>(p: &mut [T], g: &[T], m: &mut [T], v: &mut [T], c: &Coefficients<T>) {
    let one = T::one();
    for i in 0..p.len() {
        m[i] = c.beta1 * m[i] + (one - c.beta1) * g[i];
        v[i] = c.beta2 * v[i] + (one - c.beta2) * g[i] * g[i];
        let m_hat = m[i] / c.correction1;
        let v_hat = v[i] / c.correction2;
        p[i] = p[i] - c.lr * m_hat / (v_hat.sqrt() + c.eps);
    }
}

/// One Adam update on raw slices at step `step` (1-based).
pub fn adam_update<T: Real>(p: &mut [T], g: &[T], m: &mut [T], v: &mut [T], config: &AdamConfig, step: u64) {
    update(p, g, m, v, &Coefficients::new(config, step));
}
