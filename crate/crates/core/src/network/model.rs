//! Whole-network forward and backward passes.
//!
//! Conv layers are each followed by ReLU. The last feature stack is flattened in its natural
//! `(channel, x, y, band)` row-major order and fed through the dense block, with ReLU between
//! hidden layers and raw scores at the output.

use crate::network::conv::{conv3d_backward_into, conv3d_forward};
use crate::network::dense::{dense_backward_into, dense_forward};
use crate::network::loss::{relu_in_place, relu_mask, softmax_cross_entropy};
use crate::network::{ModelParams, NetworkConfig};
use crate::{Error, Real, Result, Tensor};

/// Activations retained for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass<T> {
    /// Input of each conv layer; entry 0 is the patch as a one-channel stack.
    pub conv_inputs: Vec<Tensor<T>>,
    /// Post-ReLU output of the last conv layer.
    pub features: Tensor<T>,
    /// Input of each dense layer (entry 0 is the flattened features).
    pub dense_inputs: Vec<Vec<T>>,
    pub scores: Vec<T>,
}

fn check_patch<T: Real>(cfg: &NetworkConfig, patch: &Tensor<T>) -> Result<()> {
    let expected = [cfg.patch_width, cfg.patch_height, cfg.bands];
    if patch.shape() != expected {
        return Err(Error::ShapeMismatch(format!("patch {:?}, network expects {expected:?}", patch.shape())));
    }
    Ok(())
}

pub fn forward_pass<T: Real>(params: &ModelParams<T>, cfg: &NetworkConfig, patch: &Tensor<T>) -> Result<ForwardPass<T>> {
    check_patch(cfg, patch)?;
    let mut shape = vec![1];
    shape.extend_from_slice(patch.shape());
    let mut current = Tensor::from_vec(&shape, patch.data().to_vec())?;
    let mut conv_inputs = Vec::with_capacity(params.conv.len());
    for layer in &params.conv {
        let mut out = conv3d_forward(&current, layer)?;
        relu_in_place(out.data_mut());
        conv_inputs.push(std::mem::replace(&mut current, out));
    }
    let features = current;
    let mut dense_inputs = Vec::with_capacity(params.dense.len());
    let mut x = features.data().to_vec();
    let last = params.dense.len().saturating_sub(1);
    for (i, layer) in params.dense.iter().enumerate() {
        let mut y = dense_forward(layer, &x)?;
        if i < last {
            relu_in_place(&mut y);
        }
        dense_inputs.push(std::mem::replace(&mut x, y));
    }
    Ok(ForwardPass { conv_inputs, features, dense_inputs, scores: x })
}

/// Raw class scores (no softmax).
pub fn forward<T: Real>(params: &ModelParams<T>, cfg: &NetworkConfig, patch: &Tensor<T>) -> Result<Vec<T>> {
    Ok(forward_pass(params, cfg, patch)?.scores)
}

/// `[x, y, bands]` of the patch and of every conv output, with the number of maps, as observed
/// by actually running the network.
pub fn shape_trace<T: Real>(params: &ModelParams<T>, cfg: &NetworkConfig, patch: &Tensor<T>) -> Result<Vec<(usize, [usize; 3])>> {
    let pass = forward_pass(params, cfg, patch)?;
    let mut trace: Vec<(usize, [usize; 3])> =
        pass.conv_inputs.iter().map(|t| (t.shape()[0], [t.shape()[1], t.shape()[2], t.shape()[3]])).collect();
    let f = pass.features.shape();
    trace.push((f[0], [f[1], f[2], f[3]]));
    Ok(trace)
}

/// Accumulates `d loss / d params` into `grads` given `d loss / d scores`.
pub fn backward<T: Real>(
    params: &ModelParams<T>,
    pass: &ForwardPass<T>,
    score_grad: &[T],
    grads: &mut ModelParams<T>,
) -> Result<()> {
    params.check_shape(grads)?;
    let mut upstream = score_grad.to_vec();
    for i in (0..params.dense.len()).rev() {
        let x = &pass.dense_inputs[i];
        let want_input = i > 0 || !params.conv.is_empty();
        let down = dense_backward_into(&params.dense[i], x, &upstream, &mut grads.dense[i], want_input)?;
        if let Some(mut down) = down {
            // dense inputs past the first are post-ReLU activations; the first is post-ReLU
            // conv output whenever conv layers exist
            relu_mask(x, &mut down);
            upstream = down;
        }
    }
    if params.conv.is_empty() {
        return Ok(());
    }
    let mut up = Tensor::from_vec(pass.features.shape(), upstream)?;
    for i in (0..params.conv.len()).rev() {
        let input = &pass.conv_inputs[i];
        let down = conv3d_backward_into(input, &params.conv[i], &up, &mut grads.conv[i], i > 0)?;
        if let Some(mut down) = down {
            relu_mask(input.data(), down.data_mut());
            up = down;
        }
    }
    Ok(())
}

/// Cross-entropy loss for zero-based class `target`; gradients are accumulated into `grads`.
pub fn loss_and_gradient<T: Real>(
    params: &ModelParams<T>,
    cfg: &NetworkConfig,
    patch: &Tensor<T>,
    target: usize,
    grads: &mut ModelParams<T>,
) -> Result<T> {
    let pass = forward_pass(params, cfg, patch)?;
    let (loss, score_grad) = softmax_cross_entropy(&pass.scores, target)?;
    backward(params, &pass, &score_grad, grads)?;
    Ok(loss)
}

pub fn loss<T: Real>(params: &ModelParams<T>, cfg: &NetworkConfig, patch: &Tensor<T>, target: usize) -> Result<T> {
    let scores = forward(params, cfg, patch)?;
    Ok(softmax_cross_entropy(&scores, target)?.0)
}
