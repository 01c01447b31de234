//! RMSprop and gradient clipping.

/// Denominator guard in the RMSprop update.
pub const RMSPROP_EPS: f64 = 1e-8;

/// RMSprop hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmsProp {
    pub learning_rate: f64,
    pub beta: f64,
    pub eps: f64,
}

impl RmsProp {
    pub fn new(learning_rate: f64, beta: f64) -> Self {
        Self {
            learning_rate,
            beta,
            eps: RMSPROP_EPS,
        }
    }
}

/// Running mean of squared gradients for every parameter tensor.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OptimizerState {
    pub mean_sq: Vec<Vec<f64>>,
    pub steps: u64,
}

impl OptimizerState {
    pub fn for_shapes<'a, I: IntoIterator<Item = &'a [f64]>>(tensors: I) -> Self {
        Self {
            mean_sq: tensors.into_iter().map(|t| vec![0.0; t.len()]).collect(),
            steps: 0,
        }
    }
}

impl RmsProp {
    /// `s ← β s + (1−β) g²;  θ ← θ − α g / (√s + ε)`, tensor by tensor.
    pub fn step(&self, params: Vec<&mut [f64]>, grads: &[&[f64]], state: &mut OptimizerState) {
        assert_eq!(params.len(), grads.len(), "parameter/gradient tensor count");
        assert_eq!(params.len(), state.mean_sq.len(), "optimizer state tensor count");
        for ((p, g), s) in params.into_iter().zip(grads).zip(state.mean_sq.iter_mut()) {
            assert_eq!(p.len(), g.len());
            for ((pi, &gi), si) in p.iter_mut().zip(g.iter()).zip(s.iter_mut()) {
                *si = self.beta * *si + (1.0 - self.beta) * gi * gi;
                *pi -= self.learning_rate * gi / (si.sqrt() + self.eps);
            }
        }
        state.steps += 1;
    }
}

pub fn global_norm(grads: &[&[f64]]) -> f64 {
    grads.iter().flat_map(|t| t.iter()).map(|g| g * g).sum::<f64>().sqrt()
}

/// Rescales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm(grads: Vec<&mut [f64]>, max_norm: f64) -> f64 {
    let norm = grads.iter().flat_map(|t| t.iter()).map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm.is_finite() {
        let scale = max_norm / norm;
        for t in grads {
            t.iter_mut().for_each(|g| *g *= scale);
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(opt: &RmsProp, theta: &mut Vec<f64>, g: &[f64], st: &mut OptimizerState) {
        opt.step(vec![theta.as_mut_slice()], &[g], st);
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let opt = RmsProp::new(0.01, 0.9);
        let mut theta = vec![1.0, -2.0];
        let mut st = OptimizerState::for_shapes([theta.as_slice()]);
        run(&opt, &mut theta, &[0.0, 0.0], &mut st);
        assert_eq!(theta, vec![1.0, -2.0]);
        assert_eq!(st.steps, 1);
    }

    #[test]
    fn first_step_from_zero_state() {
        // scalar oracle: s = 0.1 * 1 = 0.1, Δθ = -0.001 / (√0.1 + 1e-8)
        let opt = RmsProp::new(0.001, 0.9);
        let mut theta = vec![0.0];
        let mut st = OptimizerState::for_shapes([theta.as_slice()]);
        run(&opt, &mut theta, &[1.0], &mut st);
        let expected = -0.001 / (0.1f64.sqrt() + 1e-8);
        assert!((theta[0] - expected).abs() < 1e-18);
        assert!((expected + 0.0031622776).abs() < 1e-9);
        assert!((st.mean_sq[0][0] - 0.1).abs() < 1e-16);
    }

    #[test]
    fn constant_gradient_reaches_fixed_point() {
        // s_t = g² (1 − β^t) → g², so the step tends to α·sign(g)
        let opt = RmsProp::new(0.01, 0.9);
        let g = [3.0, -0.5];
        let mut theta = vec![0.0, 0.0];
        let mut st = OptimizerState::for_shapes([theta.as_slice()]);
        for _ in 0..300 {
            run(&opt, &mut theta, &g, &mut st);
        }
        assert!((st.mean_sq[0][0] - 9.0).abs() < 1e-9);
        assert!((st.mean_sq[0][1] - 0.25).abs() < 1e-9);
        let before = theta.clone();
        run(&opt, &mut theta, &g, &mut st);
        assert!((theta[0] - before[0] + 0.01).abs() < 1e-9);
        assert!((theta[1] - before[1] - 0.01).abs() < 1e-9);
    }

    #[test]
    fn clipping_scales_to_max_norm() {
        let mut a = vec![3.0, 0.0];
        let mut b = vec![4.0];
        let n = clip_global_norm(vec![&mut a, &mut b], 1.0);
        assert_eq!(n, 5.0);
        assert!((global_norm(&[&a, &b]) - 1.0).abs() < 1e-15);
        let mut c = vec![0.1];
        clip_global_norm(vec![&mut c], 1.0);
        assert_eq!(c, vec![0.1]);
    }
}
