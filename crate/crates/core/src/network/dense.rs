use crate::{Error, Real, Result, Tensor};

/// Fully connected layer computing `y = x W + b` with `W` stored `(in, out)` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<T = f32> {
    pub weights: Tensor<T>,
    pub biases: Tensor<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrads<T = f32> {
    pub input: Vec<T>,
    pub weights: Tensor<T>,
    pub biases: Tensor<T>,
}

impl<T: Real> DenseLayer<T> {
    pub fn zeros(in_features: usize, out_features: usize) -> Result<Self> {
        Ok(Self { weights: Tensor::zeros(&[in_features, out_features])?, biases: Tensor::zeros(&[out_features])? })
    }

    pub fn in_features(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn out_features(&self) -> usize {
        self.weights.shape()[1]
    }

    fn check_input(&self, x: &[T]) -> Result<()> {
        if x.len() != self.in_features() {
            return Err(Error::ShapeMismatch(format!(
                "dense layer expects {} inputs, got {}",
                self.in_features(),
                x.len()
            )));
        }
        Ok(())
    }
}

pub fn dense_forward<T: Real>(layer: &DenseLayer<T>, x: &[T]) -> Result<Vec<T>> {
    layer.check_input(x)?;
    let out = layer.out_features();
    let mut y = layer.biases.data().to_vec();
    for (&xi, row) in x.iter().zip(layer.weights.data().chunks_exact(out)) {
        if xi == T::zero() {
            continue;
        }
        for (yj, &w) in y.iter_mut().zip(row) {
            *yj += xi * w;
        }
    }
    Ok(y)
}

/// Accumulates parameter gradients into `grads`; returns the input gradient if requested.
pub fn dense_backward_into<T: Real>(
    layer: &DenseLayer<T>,
    x: &[T],
    upstream: &[T],
    grads: &mut DenseLayer<T>,
    want_input: bool,
) -> Result<Option<Vec<T>>> {
    layer.check_input(x)?;
    let out = layer.out_features();
    if upstream.len() != out {
        return Err(Error::ShapeMismatch(format!("upstream has {} values, layer {out} outputs", upstream.len())));
    }
    if grads.weights.shape() != layer.weights.shape() {
        return Err(Error::ShapeMismatch("gradient accumulator does not mirror the layer".into()));
    }
    for (gb, &u) in grads.biases.data_mut().iter_mut().zip(upstream) {
        *gb += u;
    }
    for (&xi, grow) in x.iter().zip(grads.weights.data_mut().chunks_exact_mut(out)) {
        if xi == T::zero() {
            continue;
        }
        for (g, &u) in grow.iter_mut().zip(upstream) {
            *g += xi * u;
        }
    }
    Ok(want_input.then(|| {
        layer
            .weights
            .data()
            .chunks_exact(out)
            .map(|row| row.iter().zip(upstream).map(|(&w, &u)| w * u).sum())
            .collect()
    }))
}

pub fn dense_backward<T: Real>(layer: &DenseLayer<T>, x: &[T], upstream: &[T]) -> Result<DenseGrads<T>> {
    let mut acc = DenseLayer { weights: layer.weights.zeros_like(), biases: layer.biases.zeros_like() };
    let input = dense_backward_into(layer, x, upstream, &mut acc, true)?.expect("requested");
    Ok(DenseGrads { input, weights: acc.weights, biases: acc.biases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SeededRng;

    #[test]
    fn identity_weights() {
        let mut l = DenseLayer::<f64>::zeros(3, 3).unwrap();
        for i in 0..3 {
            l.weights.set(&[i, i], 1.0).unwrap();
        }
        assert_eq!(dense_forward(&l, &[1.0, -2.0, 3.0]).unwrap(), vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn zero_input_gives_bias() {
        let mut l = DenseLayer::<f64>::zeros(2, 3).unwrap();
        l.weights = Tensor::filled(&[2, 3], 4.0).unwrap();
        l.biases = Tensor::from_vec(&[3], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(dense_forward(&l, &[0.0, 0.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn length_mismatch() {
        let l = DenseLayer::<f64>::zeros(2, 3).unwrap();
        assert!(dense_forward(&l, &[1.0]).is_err());
        assert!(dense_backward(&l, &[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = SeededRng::new(17);
        let mut u = || rng.uniform(-1.0, 1.0).unwrap();
        let mut l = DenseLayer::<f64>::zeros(5, 3).unwrap();
        l.weights.data_mut().iter_mut().for_each(|w| *w = u());
        l.biases.data_mut().iter_mut().for_each(|b| *b = u());
        let x: Vec<f64> = (0..5).map(|_| u()).collect();
        let up: Vec<f64> = (0..3).map(|_| u()).collect();
        let objective = |lay: &DenseLayer<f64>, x: &[f64]| -> f64 {
            dense_forward(lay, x).unwrap().iter().zip(&up).map(|(a, b)| a * b).sum()
        };
        let g = dense_backward(&l, &x, &up).unwrap();
        let eps = 1e-5;
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-8);
        let mut worst: f64 = 0.0;
        for i in 0..l.weights.len() {
            let (mut p, mut m) = (l.clone(), l.clone());
            p.weights.data_mut()[i] += eps;
            m.weights.data_mut()[i] -= eps;
            worst = worst.max(rel(g.weights.data()[i], (objective(&p, &x) - objective(&m, &x)) / (2.0 * eps)));
        }
        for i in 0..3 {
            let (mut p, mut m) = (l.clone(), l.clone());
            p.biases.data_mut()[i] += eps;
            m.biases.data_mut()[i] -= eps;
            worst = worst.max(rel(g.biases.data()[i], (objective(&p, &x) - objective(&m, &x)) / (2.0 * eps)));
        }
        for i in 0..5 {
            let (mut p, mut m) = (x.clone(), x.clone());
            p[i] += eps;
            m[i] -= eps;
            worst = worst.max(rel(g.input[i], (objective(&l, &p) - objective(&l, &m)) / (2.0 * eps)));
        }
        assert!(worst < 1e-4, "{worst}");
    }
}
