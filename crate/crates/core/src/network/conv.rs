//! Valid, unit-stride 3D convolution (cross-correlation) over `(channel, x, y, band)` stacks.
//!
//! In the channel-shared scheme one kernel is applied to every input map and the responses are
//! summed, which is the same as convolving the channel sum once. Per-channel kernels give the
//! standard multi-channel convolution.

use crate::{Error, Real, Result, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct Conv3DLayer<T = f32> {
    /// `(K, k, k, k)` for shared kernels, `(K, C, k, k, k)` for per-channel kernels.
    pub weights: Tensor<T>,
    pub biases: Tensor<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads<T = f32> {
    pub input: Tensor<T>,
    pub weights: Tensor<T>,
    pub biases: Tensor<T>,
}

impl<T: Real> Conv3DLayer<T> {
    /// Zero layer; `in_channels` is `Some` for per-channel kernels.
    pub fn zeros(kernels: usize, extent: usize, in_channels: Option<usize>) -> Result<Self> {
        let weights = match in_channels {
            Some(c) => Tensor::zeros(&[kernels, c, extent, extent, extent])?,
            None => Tensor::zeros(&[kernels, extent, extent, extent])?,
        };
        Ok(Self { weights, biases: Tensor::zeros(&[kernels])? })
    }

    pub fn kernels(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn per_channel(&self) -> bool {
        self.weights.rank() == 5
    }

    pub fn extent(&self) -> usize {
        *self.weights.shape().last().expect("non-empty shape")
    }

    fn kernel_len(&self) -> usize {
        self.extent().pow(3)
    }
}

struct Geometry {
    channels: usize,
    src: [usize; 3],
    out: [usize; 3],
}

fn geometry<T: Real>(input: &Tensor<T>, layer: &Conv3DLayer<T>) -> Result<Geometry> {
    let s = input.shape();
    if s.len() != 4 {
        return Err(Error::ShapeMismatch(format!("conv input must be (C, X, Y, L), got {s:?}")));
    }
    let k = layer.extent();
    if s[1] < k || s[2] < k || s[3] < k {
        return Err(Error::ShapeMismatch(format!("input {s:?} smaller than kernel extent {k}")));
    }
    if layer.per_channel() && layer.weights.shape()[1] != s[0] {
        return Err(Error::ShapeMismatch(format!(
            "layer expects {} input channels, got {}",
            layer.weights.shape()[1],
            s[0]
        )));
    }
    if layer.biases.len() != layer.kernels() {
        return Err(Error::ShapeMismatch("one bias per kernel required".into()));
    }
    Ok(Geometry {
        channels: s[0],
        src: [s[1], s[2], s[3]],
        out: [s[1] - k + 1, s[2] - k + 1, s[3] - k + 1],
    })
}

fn channel_sum<T: Real>(input: &Tensor<T>, map_len: usize) -> Vec<T> {
    let mut sum = input.data()[..map_len].to_vec();
    for map in input.data().chunks_exact(map_len).skip(1) {
        for (s, &v) in sum.iter_mut().zip(map) {
            *s += v;
        }
    }
    sum
}

fn corr_accumulate<T: Real>(src: &[T], sd: [usize; 3], ker: &[T], k: usize, out: &mut [T], od: [usize; 3]) {
    let [_, sy, sl] = sd;
    let [ox, oy, ol] = od;
    for x in 0..ox {
        for y in 0..oy {
            let orow = &mut out[(x * oy + y) * ol..][..ol];
            for dx in 0..k {
                for dy in 0..k {
                    let base = ((x + dx) * sy + y + dy) * sl;
                    for dl in 0..k {
                        let w = ker[(dx * k + dy) * k + dl];
                        for (o, &s) in orow.iter_mut().zip(&src[base + dl..base + dl + ol]) {
                            *o += w * s;
                        }
                    }
                }
            }
        }
    }
}

fn corr_weight_grad<T: Real>(src: &[T], sd: [usize; 3], up: &[T], od: [usize; 3], k: usize, gw: &mut [T]) {
    let [_, sy, sl] = sd;
    let [ox, oy, ol] = od;
    for x in 0..ox {
        for y in 0..oy {
            let urow = &up[(x * oy + y) * ol..][..ol];
            for dx in 0..k {
                for dy in 0..k {
                    let base = ((x + dx) * sy + y + dy) * sl;
                    for dl in 0..k {
                        let dot: T = urow.iter().zip(&src[base + dl..base + dl + ol]).map(|(&u, &s)| u * s).sum();
                        gw[(dx * k + dy) * k + dl] += dot;
                    }
                }
            }
        }
    }
}

fn corr_input_grad<T: Real>(up: &[T], od: [usize; 3], ker: &[T], k: usize, gs: &mut [T], sd: [usize; 3]) {
    let [_, sy, sl] = sd;
    let [ox, oy, ol] = od;
    for x in 0..ox {
        for y in 0..oy {
            let urow = &up[(x * oy + y) * ol..][..ol];
            for dx in 0..k {
                for dy in 0..k {
                    let base = ((x + dx) * sy + y + dy) * sl;
                    for dl in 0..k {
                        let w = ker[(dx * k + dy) * k + dl];
                        for (g, &u) in gs[base + dl..base + dl + ol].iter_mut().zip(urow) {
                            *g += w * u;
                        }
                    }
                }
            }
        }
    }
}

/// `out[k] = sum_c corr(input[c], w[k]) + b[k]` (shared) or `sum_c corr(input[c], w[k, c]) + b[k]`.
pub fn conv3d_forward<T: Real>(input: &Tensor<T>, layer: &Conv3DLayer<T>) -> Result<Tensor<T>> {
    let g = geometry(input, layer)?;
    let k = layer.extent();
    let klen = layer.kernel_len();
    let map_len: usize = g.src.iter().product();
    let out_len: usize = g.out.iter().product();
    let kernels = layer.kernels();
    let mut out = Tensor::zeros(&[kernels, g.out[0], g.out[1], g.out[2]])?;
    let w = layer.weights.data();
    let shared = (!layer.per_channel()).then(|| channel_sum(input, map_len));
    for (kk, omap) in out.data_mut().chunks_exact_mut(out_len).enumerate() {
        match &shared {
            Some(sum) => corr_accumulate(sum, g.src, &w[kk * klen..][..klen], k, omap, g.out),
            None => {
                for (c, src) in input.data().chunks_exact(map_len).enumerate() {
                    let ker = &w[(kk * g.channels + c) * klen..][..klen];
                    corr_accumulate(src, g.src, ker, k, omap, g.out);
                }
            }
        }
        let b = layer.biases.data()[kk];
        omap.iter_mut().for_each(|v| *v += b);
    }
    Ok(out)
}

/// Accumulates parameter gradients into `grads` and returns the input gradient if requested.
pub fn conv3d_backward_into<T: Real>(
    input: &Tensor<T>,
    layer: &Conv3DLayer<T>,
    upstream: &Tensor<T>,
    grads: &mut Conv3DLayer<T>,
    want_input: bool,
) -> Result<Option<Tensor<T>>> {
    let g = geometry(input, layer)?;
    let kernels = layer.kernels();
    let expected = [kernels, g.out[0], g.out[1], g.out[2]];
    if upstream.shape() != expected {
        return Err(Error::ShapeMismatch(format!(
            "upstream gradient {:?}, expected {expected:?}",
            upstream.shape()
        )));
    }
    if grads.weights.shape() != layer.weights.shape() || grads.biases.shape() != layer.biases.shape() {
        return Err(Error::ShapeMismatch("gradient accumulator does not mirror the layer".into()));
    }
    let k = layer.extent();
    let klen = layer.kernel_len();
    let map_len: usize = g.src.iter().product();
    let out_len: usize = g.out.iter().product();
    let w = layer.weights.data();
    let ups = upstream.data();

    for (kk, up) in ups.chunks_exact(out_len).enumerate() {
        let total: T = up.iter().copied().sum();
        grads.biases.data_mut()[kk] += total;
    }

    if layer.per_channel() {
        let mut grad_in = want_input.then(|| input.zeros_like());
        for (kk, up) in ups.chunks_exact(out_len).enumerate() {
            for (c, src) in input.data().chunks_exact(map_len).enumerate() {
                let off = (kk * g.channels + c) * klen;
                corr_weight_grad(src, g.src, up, g.out, k, &mut grads.weights.data_mut()[off..off + klen]);
                if let Some(gi) = grad_in.as_mut() {
                    let dst = &mut gi.data_mut()[c * map_len..][..map_len];
                    corr_input_grad(up, g.out, &w[off..off + klen], k, dst, g.src);
                }
            }
        }
        return Ok(grad_in);
    }

    let sum = channel_sum(input, map_len);
    let mut grad_sum = want_input.then(|| vec![T::zero(); map_len]);
    for (kk, up) in ups.chunks_exact(out_len).enumerate() {
        let ker = kk * klen..(kk + 1) * klen;
        corr_weight_grad(&sum, g.src, up, g.out, k, &mut grads.weights.data_mut()[ker.clone()]);
        if let Some(gs) = grad_sum.as_mut() {
            corr_input_grad(up, g.out, &w[ker], k, gs, g.src);
        }
    }
    // every input channel receives the gradient of the channel sum
    Ok(grad_sum.map(|gs| {
        let data: Vec<T> = (0..g.channels).flat_map(|_| gs.iter().copied()).collect();
        Tensor::from_vec(input.shape(), data).expect("input shape")
    }))
}

pub fn conv3d_backward<T: Real>(
    input: &Tensor<T>,
    layer: &Conv3DLayer<T>,
    upstream: &Tensor<T>,
) -> Result<ConvGrads<T>> {
    let mut acc = Conv3DLayer { weights: layer.weights.zeros_like(), biases: layer.biases.zeros_like() };
    let input_grad = conv3d_backward_into(input, layer, upstream, &mut acc, true)?.expect("requested");
    Ok(ConvGrads { input: input_grad, weights: acc.weights, biases: acc.biases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SeededRng;

    fn random(shape: &[usize], rng: &mut SeededRng) -> Tensor<f64> {
        let n = shape.iter().product();
        Tensor::from_vec(shape, (0..n).map(|_| rng.uniform(-1.0, 1.0).unwrap()).collect()).unwrap()
    }

    /// Direct evaluation of the forward contract, one output value at a time.
    fn naive_forward(input: &Tensor<f64>, layer: &Conv3DLayer<f64>) -> Tensor<f64> {
        let s = input.shape();
        let k = layer.extent();
        let kernels = layer.kernels();
        let (ox, oy, ol) = (s[1] - k + 1, s[2] - k + 1, s[3] - k + 1);
        let mut out = Tensor::zeros(&[kernels, ox, oy, ol]).unwrap();
        for kk in 0..kernels {
            for x in 0..ox {
                for y in 0..oy {
                    for l in 0..ol {
                        let mut acc = layer.biases.data()[kk];
                        for c in 0..s[0] {
                            for dx in 0..k {
                                for dy in 0..k {
                                    for dl in 0..k {
                                        let w = if layer.per_channel() {
                                            layer.weights.get(&[kk, c, dx, dy, dl]).unwrap()
                                        } else {
                                            layer.weights.get(&[kk, dx, dy, dl]).unwrap()
                                        };
                                        acc += w * input.get(&[c, x + dx, y + dy, l + dl]).unwrap();
                                    }
                                }
                            }
                        }
                        out.set(&[kk, x, y, l], acc).unwrap();
                    }
                }
            }
        }
        out
    }

    fn layer(kernels: usize, channels: Option<usize>, rng: &mut SeededRng) -> Conv3DLayer<f64> {
        let mut l = Conv3DLayer::zeros(kernels, 3, channels).unwrap();
        let shape = l.weights.shape().to_vec();
        l.weights = random(&shape, rng);
        l.biases = random(&[kernels], rng);
        l
    }

    #[test]
    fn default_architecture_shapes() {
        let input = Tensor::<f32>::zeros(&[1, 7, 7, 200]).unwrap();
        let l1 = Conv3DLayer::<f32>::zeros(24, 3, None).unwrap();
        let out = conv3d_forward(&input, &l1).unwrap();
        assert_eq!(out.shape(), &[24, 5, 5, 198]);
        let out = conv3d_forward(&out, &l1).unwrap();
        assert_eq!(out.shape(), &[24, 3, 3, 196]);
    }

    #[test]
    fn zero_layer_gives_zero_output() {
        let mut rng = SeededRng::new(0);
        let input = random(&[2, 4, 4, 5], &mut rng);
        let l = Conv3DLayer::<f64>::zeros(3, 3, None).unwrap();
        assert!(conv3d_forward(&input, &l).unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ones_kernel_sums_27() {
        let input = Tensor::<f32>::filled(&[1, 3, 3, 3], 1.0).unwrap();
        let mut l = Conv3DLayer::<f32>::zeros(1, 3, None).unwrap();
        l.weights = Tensor::filled(&[1, 3, 3, 3], 1.0).unwrap();
        let out = conv3d_forward(&input, &l).unwrap();
        assert_eq!(out.shape(), &[1, 1, 1, 1]);
        assert_eq!(out.data(), &[27.0]);
    }

    #[test]
    fn too_small_input_rejected() {
        let input = Tensor::<f32>::zeros(&[1, 2, 5, 5]).unwrap();
        let l = Conv3DLayer::<f32>::zeros(1, 3, None).unwrap();
        assert!(matches!(conv3d_forward(&input, &l), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn matches_naive_forward() {
        let mut rng = SeededRng::new(4);
        for channels in [None, Some(3)] {
            let input = random(&[3, 5, 4, 6], &mut rng);
            let l = layer(2, channels, &mut rng);
            let fast = conv3d_forward(&input, &l).unwrap();
            let slow = naive_forward(&input, &l);
            for (a, b) in fast.data().iter().zip(slow.data()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_in_input_without_bias() {
        let mut rng = SeededRng::new(8);
        let input = random(&[2, 4, 4, 4], &mut rng);
        let mut l = layer(2, None, &mut rng);
        l.biases = l.biases.zeros_like();
        let base = conv3d_forward(&input, &l).unwrap();
        let scaled = conv3d_forward(&input.map(|v| 2.5 * v), &l).unwrap();
        for (a, b) in base.data().iter().zip(scaled.data()) {
            assert!((2.5 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_upstream_zero_gradients() {
        let mut rng = SeededRng::new(1);
        let input = random(&[1, 4, 4, 4], &mut rng);
        let l = layer(2, None, &mut rng);
        let up = Tensor::zeros(&[2, 2, 2, 2]).unwrap();
        let g = conv3d_backward(&input, &l, &up).unwrap();
        assert!(g.input.data().iter().chain(g.weights.data()).chain(g.biases.data()).all(|&v| v == 0.0));
    }

    #[test]
    fn bias_gradient_counts_outputs() {
        let mut rng = SeededRng::new(1);
        let input = random(&[1, 4, 4, 4], &mut rng);
        let l = layer(2, None, &mut rng);
        let up = Tensor::filled(&[2, 2, 2, 2], 1.0).unwrap();
        let g = conv3d_backward(&input, &l, &up).unwrap();
        assert_eq!(g.biases.data(), &[8.0, 8.0]);
    }

    #[test]
    fn upstream_shape_checked() {
        let mut rng = SeededRng::new(1);
        let input = random(&[1, 4, 4, 4], &mut rng);
        let l = layer(2, None, &mut rng);
        let up = Tensor::zeros(&[2, 2, 2, 3]).unwrap();
        assert!(conv3d_backward(&input, &l, &up).is_err());
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
    }

    /// Central differences of `sum(up * conv(input))` against the analytic backward pass.
    fn check_fd(channels: usize, per_channel: bool, seed: u64) {
        let mut rng = SeededRng::new(seed);
        let input = random(&[channels, 4, 4, 4], &mut rng);
        let l = layer(2, per_channel.then_some(channels), &mut rng);
        let up = random(&[2, 2, 2, 2], &mut rng);
        let objective = |inp: &Tensor<f64>, lay: &Conv3DLayer<f64>| -> f64 {
            conv3d_forward(inp, lay).unwrap().data().iter().zip(up.data()).map(|(a, b)| a * b).sum()
        };
        let g = conv3d_backward(&input, &l, &up).unwrap();
        let eps = 1e-5;
        let mut worst: f64 = 0.0;
        for i in 0..input.len() {
            let (mut p, mut m) = (input.clone(), input.clone());
            p.data_mut()[i] += eps;
            m.data_mut()[i] -= eps;
            let num = (objective(&p, &l) - objective(&m, &l)) / (2.0 * eps);
            worst = worst.max(rel(g.input.data()[i], num));
        }
        for i in 0..l.weights.len() {
            let (mut p, mut m) = (l.clone(), l.clone());
            p.weights.data_mut()[i] += eps;
            m.weights.data_mut()[i] -= eps;
            let num = (objective(&input, &p) - objective(&input, &m)) / (2.0 * eps);
            worst = worst.max(rel(g.weights.data()[i], num));
        }
        for i in 0..l.biases.len() {
            let (mut p, mut m) = (l.clone(), l.clone());
            p.biases.data_mut()[i] += eps;
            m.biases.data_mut()[i] -= eps;
            let num = (objective(&input, &p) - objective(&input, &m)) / (2.0 * eps);
            worst = worst.max(rel(g.biases.data()[i], num));
        }
        assert!(worst < 1e-4, "max relative error {worst}");
    }

    #[test]
    fn backward_matches_finite_differences() {
        check_fd(1, false, 21);
        check_fd(3, false, 22);
        check_fd(3, true, 23);
    }
}
