use crate::network::conv::Conv3DLayer;
use crate::network::dense::DenseLayer;
use crate::network::NetworkConfig;
use crate::{Error, Real, Result, SeededRng, Tensor};

/// All trainable parameters, in declaration order: conv layers first, then dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T = f32> {
    pub conv: Vec<Conv3DLayer<T>>,
    pub dense: Vec<DenseLayer<T>>,
}

impl<T: Real> ModelParams<T> {
    pub fn zeros(cfg: &NetworkConfig) -> Result<Self> {
        cfg.validate()?;
        let shapes = cfg.conv_shapes();
        let conv = shapes[..cfg.num_conv_layers]
            .iter()
            .map(|s| {
                let channels = cfg.per_channel_kernels.then_some(s[0]);
                Conv3DLayer::zeros(cfg.kernels_per_layer, cfg.kernel_extent, channels)
            })
            .collect::<Result<_>>()?;
        let dense = cfg.dense_shapes().into_iter().map(|(i, o)| DenseLayer::zeros(i, o)).collect::<Result<_>>()?;
        Ok(Self { conv, dense })
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            conv: self
                .conv
                .iter()
                .map(|l| Conv3DLayer { weights: l.weights.zeros_like(), biases: l.biases.zeros_like() })
                .collect(),
            dense: self
                .dense
                .iter()
                .map(|l| DenseLayer { weights: l.weights.zeros_like(), biases: l.biases.zeros_like() })
                .collect(),
        }
    }

    /// Parameter blocks in declaration order (each layer's weights, then its biases).
    pub fn blocks(&self) -> Vec<&Tensor<T>> {
        let conv = self.conv.iter().flat_map(|l| [&l.weights, &l.biases]);
        let dense = self.dense.iter().flat_map(|l| [&l.weights, &l.biases]);
        conv.chain(dense).collect()
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut Tensor<T>> {
        let conv = self.conv.iter_mut().flat_map(|l| [&mut l.weights, &mut l.biases]);
        let dense = self.dense.iter_mut().flat_map(|l| [&mut l.weights, &mut l.biases]);
        conv.chain(dense).collect()
    }

    pub fn len(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        let (a, b) = (self.blocks(), other.blocks());
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.shape() == y.shape())
    }

    pub fn check_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch("parameter sets differ in layout".into()))
        }
    }

    pub fn fill_zero(&mut self) {
        for b in self.blocks_mut() {
            b.data_mut().iter_mut().for_each(|v| *v = T::zero());
        }
    }

    pub fn scale(&mut self, factor: T) {
        for b in self.blocks_mut() {
            b.data_mut().iter_mut().for_each(|v| *v = *v * factor);
        }
    }

    pub fn cast<U: Real>(&self) -> ModelParams<U> {
        ModelParams {
            conv: self.conv.iter().map(|l| Conv3DLayer { weights: l.weights.cast(), biases: l.biases.cast() }).collect(),
            dense: self.dense.iter().map(|l| DenseLayer { weights: l.weights.cast(), biases: l.biases.cast() }).collect(),
        }
    }
}

/// Fan-in scaled uniform initialisation: weights in `[-s, s]` with `s = sqrt(6 / fan_in)`,
/// biases zero. Conv fan-in is `k^3 * C` for `C` input channels, dense fan-in is `in_features`.
pub fn init_params<T: Real>(cfg: &NetworkConfig, rng: &mut SeededRng) -> Result<ModelParams<T>> {
    let mut params = ModelParams::zeros(cfg)?;
    let shapes = cfg.conv_shapes();
    let k3 = cfg.kernel_extent.pow(3);
    for (layer, shape) in params.conv.iter_mut().zip(&shapes) {
        fill_uniform(layer.weights.data_mut(), k3 * shape[0], rng);
    }
    for layer in &mut params.dense {
        let fan_in = layer.in_features();
        fill_uniform(layer.weights.data_mut(), fan_in, rng);
    }
    Ok(params)
}

fn fill_uniform<T: Real>(data: &mut [T], fan_in: usize, rng: &mut SeededRng) {
    let s = (6.0 / fan_in as f64).sqrt();
    for w in data {
        *w = T::of(rng.uniform(-s, s).expect("s > 0"));
    }
}
