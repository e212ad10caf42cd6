use crate::{Error, Real, Result, Tensor};

pub fn relu<T: Real>(t: &Tensor<T>) -> Tensor<T> {
    t.map(|v| v.max(T::zero()))
}

/// Passes `upstream` where the forward input was strictly positive; the subgradient at 0 is 0.
pub fn relu_backward<T: Real>(input: &Tensor<T>, upstream: &Tensor<T>) -> Result<Tensor<T>> {
    if input.shape() != upstream.shape() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", input.shape(), upstream.shape())));
    }
    let data = input.data().iter().zip(upstream.data()).map(|(&x, &u)| if x > T::zero() { u } else { T::zero() });
    Tensor::from_vec(input.shape(), data.collect())
}

pub(crate) fn relu_in_place<T: Real>(v: &mut [T]) {
    v.iter_mut().for_each(|x| *x = x.max(T::zero()));
}

/// Masks `grad` by `activation > 0`; the ReLU output is positive exactly where its input was.
pub(crate) fn relu_mask<T: Real>(activation: &[T], grad: &mut [T]) {
    for (g, &a) in grad.iter_mut().zip(activation) {
        if a <= T::zero() {
            *g = T::zero();
        }
    }
}

/// Fused softmax and cross-entropy for a zero-based `label`.
///
/// Returns `-ln softmax(logits)[label]` and its gradient `softmax(logits) - onehot(label)`.
pub fn softmax_cross_entropy<T: Real>(logits: &[T], label: usize) -> Result<(T, Vec<T>)> {
    if label >= logits.len() {
        return Err(Error::InvalidLabel { label, classes: logits.len() });
    }
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    let loss = total.ln() - (logits[label] - max);
    let mut grad: Vec<T> = exps.into_iter().map(|e| e / total).collect();
    grad[label] = grad[label] - T::one();
    Ok((loss, grad))
}
