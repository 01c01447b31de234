//! Dense + softmax output layer and categorical cross-entropy.

use rand::Rng;

use super::matrix::Matrix;
use super::RnnError;

/// Guard added inside the logarithm of the cross-entropy.
pub const LOG_EPS: f64 = 1e-12;

/// Projection `n_hidden → n_vocab` followed by softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxHead {
    pub w_y: Matrix,
    pub b_y: Vec<f64>,
}

impl SoftmaxHead {
    pub fn zeros(n_hidden: usize, n_vocab: usize) -> Self {
        Self {
            w_y: Matrix::zeros(n_vocab, n_hidden),
            b_y: vec![0.0; n_vocab],
        }
    }

    pub fn init<R: Rng + ?Sized>(n_hidden: usize, n_vocab: usize, scale: f64, rng: &mut R) -> Self {
        let limit = scale * (6.0 / (n_hidden + n_vocab) as f64).sqrt();
        Self {
            w_y: Matrix::uniform(n_vocab, n_hidden, limit, rng),
            b_y: vec![0.0; n_vocab],
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.n_hidden(), self.n_vocab())
    }

    pub fn n_hidden(&self) -> usize {
        self.w_y.cols()
    }

    pub fn n_vocab(&self) -> usize {
        self.w_y.rows()
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        vec![self.w_y.as_slice(), &self.b_y]
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.w_y.as_mut_slice(), &mut self.b_y]
    }

    pub fn logits(&self, a: &[f64]) -> Result<Vec<f64>, RnnError> {
        if a.len() != self.n_hidden() {
            return Err(RnnError::Shape(format!(
                "head expects {} hidden units, got {}",
                self.n_hidden(),
                a.len()
            )));
        }
        Ok(self.w_y.affine(a, &self.b_y))
    }

    /// Class probabilities for hidden activation `a`.
    pub fn predict(&self, a: &[f64]) -> Result<Vec<f64>, RnnError> {
        Ok(softmax(&self.logits(a)?))
    }

    /// Gradient of `cross_entropy(predict(a), target)` with respect to the
    /// logits is `p − e_target`; accumulates weight gradients into `grads` and
    /// returns `∂L/∂a`.
    pub fn backward(&self, a: &[f64], probs: &[f64], target: usize, grads: &mut SoftmaxHead) -> Vec<f64> {
        let mut dlogits = probs.to_vec();
        dlogits[target] -= 1.0;
        grads.w_y.add_outer(&dlogits, a);
        for (g, d) in grads.b_y.iter_mut().zip(&dlogits) {
            *g += d;
        }
        let mut da = vec![0.0; a.len()];
        self.w_y.add_transpose_mul(&dlogits, &mut da);
        da
    }
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `−ln(p[target] + 1e−12)`.
pub fn cross_entropy(probs: &[f64], target: usize) -> Result<f64, RnnError> {
    let p = probs
        .get(target)
        .ok_or_else(|| RnnError::Shape(format!("target {target} outside {} classes", probs.len())))?;
    Ok(-(p + LOG_EPS).ln())
}

/// Mean cross-entropy over a sequence of predictions.
pub fn mean_cross_entropy(probs: &[Vec<f64>], targets: &[usize]) -> Result<f64, RnnError> {
    if probs.len() != targets.len() {
        return Err(RnnError::Shape("prediction/target length mismatch".into()));
    }
    if probs.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (p, &t) in probs.iter().zip(targets) {
        total += cross_entropy(p, t)?;
    }
    Ok(total / probs.len() as f64)
}
