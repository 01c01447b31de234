//! LSTM cell and its unrolled forward/backward passes.
//!
//! Per step, with `z = [a_prev, x]`:
//!
//! ```text
//! c̃  = tanh(W_c z + b_c)
//! Γ_u = σ(W_u z + b_u)
//! Γ_f = σ(W_f z + b_f)
//! Γ_o = σ(W_o z + b_o)
//! c   = Γ_u ∗ c̃ + Γ_f ∗ c_prev
//! a   = Γ_o ∗ c            (or Γ_o ∗ tanh(c) with `OutputActivation::Tanh`)
//! ```

use rand::Rng;

use super::matrix::{axpy, dot, Matrix};
use super::RnnError;

/// What the output gate multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputActivation {
    /// `a = Γ_o ∗ c`.
    #[default]
    Identity,
    /// `a = Γ_o ∗ tanh(c)`, the common textbook variant.
    Tanh,
}

impl OutputActivation {
    fn apply(self, c: f64) -> f64 {
        match self {
            Self::Identity => c,
            Self::Tanh => c.tanh(),
        }
    }

    /// Derivative expressed through the activated value `g = apply(c)`.
    fn derivative(self, g: f64) -> f64 {
        match self {
            Self::Identity => 1.0,
            Self::Tanh => 1.0 - g * g,
        }
    }
}

/// Weight initialization settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitConfig {
    /// Multiplies the Glorot limit `√(6 / (fan_in + fan_out))`.
    pub weight_scale: f64,
    pub forget_bias: f64,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            weight_scale: 1.0,
            forget_bias: 1.0,
        }
    }
}

/// Hidden activation and cell state.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub a: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(n_hidden: usize) -> Self {
        Self {
            a: vec![0.0; n_hidden],
            c: vec![0.0; n_hidden],
        }
    }
}

/// Weights of one LSTM layer. Every gate matrix has shape
/// `n_hidden × (n_hidden + n_input)`; the first `n_hidden` columns act on
/// `a_prev`, the rest on `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub w_c: Matrix,
    pub w_u: Matrix,
    pub w_f: Matrix,
    pub w_o: Matrix,
    pub b_c: Vec<f64>,
    pub b_u: Vec<f64>,
    pub b_f: Vec<f64>,
    pub b_o: Vec<f64>,
    pub output: OutputActivation,
}

/// Values saved by the forward pass for BPTT.
#[derive(Debug, Clone)]
pub struct CellCache {
    x_nonzero: Vec<(usize, f64)>,
    a_prev: Vec<f64>,
    c_prev: Vec<f64>,
    cand: Vec<f64>,
    update: Vec<f64>,
    forget: Vec<f64>,
    out: Vec<f64>,
    g_c: Vec<f64>,
}

impl CellCache {
    pub fn candidate(&self) -> &[f64] {
        &self.cand
    }

    /// `(Γ_u, Γ_f, Γ_o)`.
    pub fn gates(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.update, &self.forget, &self.out)
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Cell-state combination `Γ_u ∗ c̃ + Γ_f ∗ c_prev`.
pub fn combine_cell(update: &[f64], cand: &[f64], forget: &[f64], c_prev: &[f64]) -> Vec<f64> {
    update
        .iter()
        .zip(cand)
        .zip(forget.iter().zip(c_prev))
        .map(|((u, cc), (f, cp))| u * cc + f * cp)
        .collect()
}

impl LstmParams {
    pub fn zeros(n_input: usize, n_hidden: usize) -> Self {
        let m = || Matrix::zeros(n_hidden, n_hidden + n_input);
        Self {
            w_c: m(),
            w_u: m(),
            w_f: m(),
            w_o: m(),
            b_c: vec![0.0; n_hidden],
            b_u: vec![0.0; n_hidden],
            b_f: vec![0.0; n_hidden],
            b_o: vec![0.0; n_hidden],
            output: OutputActivation::Identity,
        }
    }

    /// Glorot-uniform weights, zero biases except the forget gate.
    pub fn init<R: Rng + ?Sized>(n_input: usize, n_hidden: usize, cfg: InitConfig, rng: &mut R) -> Self {
        let cols = n_hidden + n_input;
        let limit = cfg.weight_scale * (6.0 / (cols + n_hidden) as f64).sqrt();
        let mut p = Self::zeros(n_input, n_hidden);
        p.w_c = Matrix::uniform(n_hidden, cols, limit, rng);
        p.w_u = Matrix::uniform(n_hidden, cols, limit, rng);
        p.w_f = Matrix::uniform(n_hidden, cols, limit, rng);
        p.w_o = Matrix::uniform(n_hidden, cols, limit, rng);
        p.b_f = vec![cfg.forget_bias; n_hidden];
        p
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = Self::zeros(self.n_input(), self.n_hidden());
        z.output = self.output;
        z
    }

    pub fn n_hidden(&self) -> usize {
        self.w_c.rows()
    }

    pub fn n_input(&self) -> usize {
        self.w_c.cols() - self.w_c.rows()
    }

    pub fn matrices(&self) -> [&Matrix; 4] {
        [&self.w_c, &self.w_u, &self.w_f, &self.w_o]
    }

    pub fn biases(&self) -> [&Vec<f64>; 4] {
        [&self.b_c, &self.b_u, &self.b_f, &self.b_o]
    }

    /// All parameter blocks in a fixed order: `W_c W_u W_f W_o b_c b_u b_f b_o`.
    pub fn tensors(&self) -> Vec<&[f64]> {
        vec![
            self.w_c.as_slice(),
            self.w_u.as_slice(),
            self.w_f.as_slice(),
            self.w_o.as_slice(),
            &self.b_c,
            &self.b_u,
            &self.b_f,
            &self.b_o,
        ]
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w_c.as_mut_slice(),
            self.w_u.as_mut_slice(),
            self.w_f.as_mut_slice(),
            self.w_o.as_mut_slice(),
            &mut self.b_c,
            &mut self.b_u,
            &mut self.b_f,
            &mut self.b_o,
        ]
    }

    pub fn validate(&self) -> Result<(), RnnError> {
        let shape = self.w_c.shape();
        let n = shape.0;
        if self.matrices().iter().any(|m| m.shape() != shape) || shape.1 < n {
            return Err(RnnError::Shape("LSTM gate matrices differ in shape".into()));
        }
        if self.biases().iter().any(|b| b.len() != n) {
            return Err(RnnError::Shape("LSTM bias length".into()));
        }
        if !self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite())) {
            return Err(RnnError::NonFinite("LSTM parameters".into()));
        }
        Ok(())
    }

    fn pre_activation(&self, w: &Matrix, b: &[f64], a: &[f64], x_nz: &[(usize, f64)]) -> Vec<f64> {
        let n = self.n_hidden();
        (0..n)
            .map(|r| {
                let row = w.row(r);
                let mut s = b[r] + dot(&row[..n], a);
                for &(j, v) in x_nz {
                    s += row[n + j] * v;
                }
                s
            })
            .collect()
    }

    /// One step of the recurrence.
    pub fn cell_forward(&self, x: &[f64], prev: &LstmState) -> Result<(LstmState, CellCache), RnnError> {
        let n = self.n_hidden();
        if x.len() != self.n_input() {
            return Err(RnnError::Shape(format!(
                "input has {} entries, cell expects {}",
                x.len(),
                self.n_input()
            )));
        }
        if prev.a.len() != n || prev.c.len() != n {
            return Err(RnnError::Shape(format!(
                "state has ({}, {}) entries, cell expects {n}",
                prev.a.len(),
                prev.c.len()
            )));
        }
        let x_nonzero: Vec<(usize, f64)> = x
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, &v)| (j, v))
            .collect();
        let a = &prev.a;
        let cand: Vec<f64> = self
            .pre_activation(&self.w_c, &self.b_c, a, &x_nonzero)
            .into_iter()
            .map(f64::tanh)
            .collect();
        let gate = |w, b| -> Vec<f64> {
            self.pre_activation(w, b, a, &x_nonzero)
                .into_iter()
                .map(sigmoid)
                .collect()
        };
        let update = gate(&self.w_u, &self.b_u);
        let forget = gate(&self.w_f, &self.b_f);
        let out = gate(&self.w_o, &self.b_o);
        let c = combine_cell(&update, &cand, &forget, &prev.c);
        let g_c: Vec<f64> = c.iter().map(|&v| self.output.apply(v)).collect();
        let a_next: Vec<f64> = out.iter().zip(&g_c).map(|(o, g)| o * g).collect();
        let cache = CellCache {
            x_nonzero,
            a_prev: prev.a.clone(),
            c_prev: prev.c.clone(),
            cand,
            update,
            forget,
            out,
            g_c,
        };
        Ok((LstmState { a: a_next, c }, cache))
    }

    /// Runs the recurrence over `inputs`. The returned states start with
    /// `init`, so there are `inputs.len() + 1` of them.
    pub fn forward<X: AsRef<[f64]>>(
        &self,
        inputs: &[X],
        init: &LstmState,
    ) -> Result<(Vec<LstmState>, Vec<CellCache>), RnnError> {
        let mut states = Vec::with_capacity(inputs.len() + 1);
        let mut caches = Vec::with_capacity(inputs.len());
        states.push(init.clone());
        for x in inputs {
            let (s, c) = self.cell_forward(x.as_ref(), states.last().unwrap())?;
            states.push(s);
            caches.push(c);
        }
        Ok((states, caches))
    }

    /// Backward through one cell. Accumulates weight gradients into `grads`
    /// and returns `(∂L/∂a_prev, ∂L/∂c_prev)`.
    pub fn cell_backward(
        &self,
        cache: &CellCache,
        da: &[f64],
        dc_next: &[f64],
        grads: &mut LstmParams,
    ) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_hidden();
        let mut dz_c = vec![0.0; n];
        let mut dz_u = vec![0.0; n];
        let mut dz_f = vec![0.0; n];
        let mut dz_o = vec![0.0; n];
        let mut dc_prev = vec![0.0; n];
        for k in 0..n {
            let o = cache.out[k];
            let g = cache.g_c[k];
            let d_out = da[k] * g;
            let dc = dc_next[k] + da[k] * o * self.output.derivative(g);
            let (u, f, cc) = (cache.update[k], cache.forget[k], cache.cand[k]);
            dz_c[k] = dc * u * (1.0 - cc * cc);
            dz_u[k] = dc * cc * u * (1.0 - u);
            dz_f[k] = dc * cache.c_prev[k] * f * (1.0 - f);
            dz_o[k] = d_out * o * (1.0 - o);
            dc_prev[k] = dc * f;
        }
        let mut da_prev = vec![0.0; n];
        let pairs: [(&Matrix, &mut Matrix, &mut Vec<f64>, &Vec<f64>); 4] = [
            (&self.w_c, &mut grads.w_c, &mut grads.b_c, &dz_c),
            (&self.w_u, &mut grads.w_u, &mut grads.b_u, &dz_u),
            (&self.w_f, &mut grads.w_f, &mut grads.b_f, &dz_f),
            (&self.w_o, &mut grads.w_o, &mut grads.b_o, &dz_o),
        ];
        for (w, gw, gb, dz) in pairs {
            for r in 0..n {
                let d = dz[r];
                if d == 0.0 {
                    continue;
                }
                gb[r] += d;
                let grow = gw.row_mut(r);
                axpy(d, &cache.a_prev, &mut grow[..n]);
                for &(j, v) in &cache.x_nonzero {
                    grow[n + j] += d * v;
                }
                axpy(d, &w.row(r)[..n], &mut da_prev);
            }
        }
        (da_prev, dc_prev)
    }

    /// Backpropagation through the unrolled chain.
    ///
    /// `d_a[t]` is the loss gradient flowing into the activation of step `t`
    /// from outside the recurrence (for instance from an output head);
    /// `d_final` is the gradient on the final state. Returns the parameter
    /// gradients and the gradient on the initial state.
    pub fn backward(
        &self,
        caches: &[CellCache],
        d_a: &[Vec<f64>],
        d_final: &LstmState,
    ) -> Result<(LstmParams, LstmState), RnnError> {
        if d_a.len() != caches.len() {
            return Err(RnnError::Shape(format!(
                "{} upstream gradients for {} steps",
                d_a.len(),
                caches.len()
            )));
        }
        let mut grads = self.zeros_like();
        let mut da_next = d_final.a.clone();
        let mut dc_next = d_final.c.clone();
        for (cache, da_out) in caches.iter().zip(d_a).rev() {
            let da: Vec<f64> = da_next.iter().zip(da_out).map(|(x, y)| x + y).collect();
            let (da_prev, dc_prev) = self.cell_backward(cache, &da, &dc_next, &mut grads);
            da_next = da_prev;
            dc_next = dc_prev;
        }
        Ok((grads, LstmState { a: da_next, c: dc_next }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_params_zero_state() {
        let p = LstmParams::zeros(3, 4);
        let (s, cache) = p.cell_forward(&[1.0, 0.0, 0.0], &LstmState::zeros(4)).unwrap();
        assert!(cache.candidate().iter().all(|&v| v == 0.0));
        let (u, f, o) = cache.gates();
        assert!(u.iter().chain(f).chain(o).all(|&g| g == 0.5));
        assert_eq!(s, LstmState::zeros(4));
    }

    #[test]
    fn zero_params_carry_half_the_cell() {
        let p = LstmParams::zeros(2, 3);
        let prev = LstmState {
            a: vec![0.0; 3],
            c: vec![1.0, -2.0, 4.0],
        };
        let (s, _) = p.cell_forward(&[0.3, -0.7], &prev).unwrap();
        assert_eq!(s.c, vec![0.5, -1.0, 2.0]);
        assert_eq!(s.a, vec![0.25, -0.5, 1.0]);
    }

    #[test]
    fn memory_gate_identity() {
        let c_prev = [0.3, -1.7, 2.5];
        let cand = [0.9, -0.2, 0.4];
        let c = combine_cell(&[0.0; 3], &cand, &[1.0; 3], &c_prev);
        assert_eq!(c, c_prev);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let p = LstmParams::zeros(2, 3);
        assert!(p.cell_forward(&[0.0; 3], &LstmState::zeros(3)).is_err());
        assert!(p.cell_forward(&[0.0; 2], &LstmState::zeros(2)).is_err());
    }

    #[test]
    fn empty_sequence_returns_init() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = LstmParams::init(3, 4, InitConfig::default(), &mut rng);
        let init = LstmState {
            a: vec![0.1; 4],
            c: vec![-0.2; 4],
        };
        let (states, caches) = p.forward::<Vec<f64>>(&[], &init).unwrap();
        assert_eq!(states, vec![init]);
        assert!(caches.is_empty());
    }

    #[test]
    fn init_uses_glorot_limit_and_forget_bias() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = LstmParams::init(5, 7, InitConfig::default(), &mut rng);
        let limit = (6.0f64 / 19.0).sqrt();
        for m in p.matrices() {
            assert!(m.as_slice().iter().all(|v| v.abs() <= limit));
        }
        assert!(p.b_f.iter().all(|&b| b == 1.0));
        assert!(p.b_c.iter().chain(&p.b_u).chain(&p.b_o).all(|&b| b == 0.0));
        p.validate().unwrap();
    }
}
