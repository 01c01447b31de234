//! Recurrent building blocks: LSTM layer, softmax head, loss, BPTT and
//! RMSprop. All math is `f64`.

mod head;
mod lstm;
mod matrix;
mod optim;

use thiserror::Error;

pub use head::{cross_entropy, mean_cross_entropy, softmax, SoftmaxHead, LOG_EPS};
pub use lstm::{combine_cell, CellCache, InitConfig, LstmParams, LstmState, OutputActivation};
pub use matrix::Matrix;
pub use optim::{clip_global_norm, global_norm, OptimizerState, RmsProp, RMSPROP_EPS};

#[derive(Debug, Error)]
pub enum RnnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite values in {0}")]
    NonFinite(String),
}

/// Gradients for an LSTM layer topped by a softmax head.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub lstm: LstmParams,
    pub head: SoftmaxHead,
}

impl Gradients {
    pub fn zeros_like(lstm: &LstmParams, head: &SoftmaxHead) -> Self {
        Self {
            lstm: lstm.zeros_like(),
            head: head.zeros_like(),
        }
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.lstm.tensors();
        t.extend(self.head.tensors());
        t
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.lstm.tensors_mut();
        t.extend(self.head.tensors_mut());
        t
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }
}

/// One aligned training sequence: an input vector and a target class per step.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceExample {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<usize>,
}

/// Loss of one sequence: the LSTM runs from `init`, the head predicts the
/// target at every step, and per-step cross-entropies are summed.
pub fn sequence_loss(
    lstm: &LstmParams,
    head: &SoftmaxHead,
    init: &LstmState,
    example: &SequenceExample,
) -> Result<f64, RnnError> {
    check_example(example)?;
    let (states, _) = lstm.forward(&example.inputs, init)?;
    let mut total = 0.0;
    for (s, &t) in states[1..].iter().zip(&example.targets) {
        total += cross_entropy(&head.predict(&s.a)?, t)?;
    }
    Ok(total)
}

fn check_example(example: &SequenceExample) -> Result<(), RnnError> {
    if example.inputs.len() != example.targets.len() {
        return Err(RnnError::Shape(format!(
            "{} inputs but {} targets",
            example.inputs.len(),
            example.targets.len()
        )));
    }
    Ok(())
}

/// Backpropagation through time for a batch of sequences.
///
/// Returns the summed loss and `∂L/∂θ` for every LSTM and head parameter,
/// summed over timesteps and examples. Each example's gradient is computed in
/// isolation and then added, so duplicating an example exactly doubles the
/// result. No clipping is applied here.
pub fn bptt(
    lstm: &LstmParams,
    head: &SoftmaxHead,
    init: &LstmState,
    examples: &[SequenceExample],
) -> Result<(f64, Gradients), RnnError> {
    let mut total = Gradients::zeros_like(lstm, head);
    let mut loss = 0.0;
    for ex in examples {
        check_example(ex)?;
        let mut grads = Gradients::zeros_like(lstm, head);
        let (states, caches) = lstm.forward(&ex.inputs, init)?;
        let mut d_a = Vec::with_capacity(caches.len());
        for (s, &t) in states[1..].iter().zip(&ex.targets) {
            let probs = head.predict(&s.a)?;
            loss += cross_entropy(&probs, t)?;
            d_a.push(head.backward(&s.a, &probs, t, &mut grads.head));
        }
        let zero = LstmState::zeros(lstm.n_hidden());
        let (g, _) = lstm.backward(&caches, &d_a, &zero)?;
        grads.lstm = g;
        total.add_assign(&grads);
    }
    Ok((loss, total))
}
