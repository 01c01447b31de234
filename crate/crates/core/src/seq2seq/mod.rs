//! Encoder–decoder translator (`T_x ≠ T_y`).
//!
//! The encoder LSTM reads the one-hot source tokens; its final `(a, c)` is
//! copied into the decoder's initial state. The decoder is teacher-forced
//! during training (input `SOS, y₁ … y_T`, targets `y₁ … y_T, EOS`) and
//! decodes greedily at inference.

mod checkpoint;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{CorpusError, ParallelCorpus};
use crate::rnn::{
    clip_global_norm, cross_entropy, InitConfig, LstmParams, LstmState, OptimizerState, OutputActivation, RmsProp,
    RnnError, SoftmaxHead,
};
use crate::tokenizer::{self, Side, TokenSequence, TokenizerError, Vocabulary};

pub use checkpoint::{CheckpointError, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};

#[derive(Debug, Error)]
pub enum Seq2SeqError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Rnn(#[from] RnnError),
    #[error(transparent)]
    Tokenizer(#[from] TokenizerError),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("training split is empty")]
    EmptyTraining,
    #[error("cannot evaluate on an empty corpus")]
    EmptyCorpus,
    #[error("non-finite loss at epoch {epoch} on {source_text:?}")]
    NonFiniteLoss { epoch: usize, source_text: String },
}

/// Hyperparameters of [`train`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// RMSprop decay.
    pub beta: f64,
    pub val_fraction: f64,
    pub seed: u64,
    pub max_decode_len: usize,
    pub n_hidden: usize,
    /// Global-norm gradient clip per update.
    pub clip_norm: f64,
    pub reverse_source: bool,
    pub init: InitConfig,
    pub output_activation: OutputActivation,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            epochs: 100,
            beta: 0.9,
            val_fraction: 0.2,
            seed: 7,
            max_decode_len: 12,
            n_hidden: 256,
            clip_norm: 5.0,
            reverse_source: false,
            init: InitConfig::default(),
            output_activation: OutputActivation::Identity,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), Seq2SeqError> {
        let bad = |m: &str| Err(Seq2SeqError::Config(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if !(0.0..1.0).contains(&self.beta) {
            return bad("beta must lie in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return bad("validation fraction must lie in [0, 1)");
        }
        if self.n_hidden == 0 {
            return bad("hidden size must be positive");
        }
        if self.max_decode_len == 0 {
            return bad("max decode length must be positive");
        }
        if self.clip_norm.is_nan() || self.clip_norm <= 0.0 {
            return bad("clip norm must be positive");
        }
        Ok(())
    }
}

/// Per-epoch losses, mean cross-entropy per target token. The training
/// figure is the running mean over the epoch's updates; validation is
/// measured teacher-forced after the epoch and is `None` without a
/// validation split.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossHistory {
    pub train: Vec<f64>,
    pub val: Vec<Option<f64>>,
}

impl LossHistory {
    pub fn len(&self) -> usize {
        self.train.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train.is_empty()
    }

    /// `epoch,train_loss,val_loss` with 1-based epochs; missing validation
    /// values are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss\n");
        for (i, (t, v)) in self.train.iter().zip(&self.val).enumerate() {
            let v = v.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", i + 1, t, v));
        }
        out
    }
}

/// Aggregate translation quality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub exact_match_rate: f64,
    pub token_accuracy: f64,
}

/// Trained (or freshly initialized) translator.
#[derive(Debug, Clone, PartialEq)]
pub struct Seq2SeqModel {
    pub encoder: LstmParams,
    pub decoder: LstmParams,
    pub head: SoftmaxHead,
    pub source_vocab: Vocabulary,
    pub target_vocab: Vocabulary,
    pub reverse_source: bool,
    pub max_decode_len: usize,
}

/// Gradients with the same layout as [`Seq2SeqModel`]'s parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGradients {
    pub encoder: LstmParams,
    pub decoder: LstmParams,
    pub head: SoftmaxHead,
}

impl ModelGradients {
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.encoder.tensors();
        t.extend(self.decoder.tensors());
        t.extend(self.head.tensors());
        t
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.encoder.tensors_mut();
        t.extend(self.decoder.tensors_mut());
        t.extend(self.head.tensors_mut());
        t
    }
}

fn one_hot_inputs(indices: &[usize], dim: usize) -> Vec<Vec<f64>> {
    indices
        .iter()
        .map(|&i| {
            let mut v = vec![0.0; dim];
            v[i] = 1.0;
            v
        })
        .collect()
}

impl Seq2SeqModel {
    /// Fresh model with vocabularies built from `corpus`.
    pub fn new(corpus: &ParallelCorpus, config: &TrainingConfig, rng: &mut ChaCha8Rng) -> Self {
        let source_vocab = Vocabulary::build(corpus, Side::Source);
        let target_vocab = Vocabulary::build(corpus, Side::Target);
        Self::with_vocabularies(source_vocab, target_vocab, config, rng)
    }

    pub fn with_vocabularies(
        source_vocab: Vocabulary,
        target_vocab: Vocabulary,
        config: &TrainingConfig,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let n = config.n_hidden;
        let mut encoder = LstmParams::init(source_vocab.len(), n, config.init, rng);
        let mut decoder = LstmParams::init(target_vocab.len(), n, config.init, rng);
        encoder.output = config.output_activation;
        decoder.output = config.output_activation;
        let head = SoftmaxHead::init(n, target_vocab.len(), config.init.weight_scale, rng);
        Self {
            encoder,
            decoder,
            head,
            source_vocab,
            target_vocab,
            reverse_source: config.reverse_source,
            max_decode_len: config.max_decode_len,
        }
    }

    pub fn n_hidden(&self) -> usize {
        self.encoder.n_hidden()
    }

    pub fn validate(&self) -> Result<(), RnnError> {
        self.encoder.validate()?;
        self.decoder.validate()?;
        let n = self.n_hidden();
        if self.decoder.n_hidden() != n || self.head.n_hidden() != n {
            return Err(RnnError::Shape("encoder/decoder/head hidden sizes differ".into()));
        }
        if self.encoder.n_input() != self.source_vocab.len()
            || self.decoder.n_input() != self.target_vocab.len()
            || self.head.n_vocab() != self.target_vocab.len()
        {
            return Err(RnnError::Shape("layer sizes do not match vocabularies".into()));
        }
        if !self.head.w_y.is_finite() || !self.head.b_y.iter().all(|v| v.is_finite()) {
            return Err(RnnError::NonFinite("output head".into()));
        }
        Ok(())
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.encoder.tensors();
        t.extend(self.decoder.tensors());
        t.extend(self.head.tensors());
        t
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.encoder.tensors_mut();
        t.extend(self.decoder.tensors_mut());
        t.extend(self.head.tensors_mut());
        t
    }

    fn source_indices(&self, text: &str) -> Vec<usize> {
        let mut idx = self.source_vocab.encode_text(text).0;
        if self.reverse_source {
            idx.reverse();
        }
        idx
    }

    fn target_indices(&self, glosses: &[String]) -> Vec<usize> {
        self.target_vocab.encode(glosses).0
    }

    /// Final encoder state for `text`; the zero state for empty input.
    pub fn encode(&self, text: &str) -> Result<LstmState, RnnError> {
        let x = one_hot_inputs(&self.source_indices(text), self.source_vocab.len());
        let (states, _) = self.encoder.forward(&x, &LstmState::zeros(self.n_hidden()))?;
        Ok(states.last().cloned().expect("forward returns the initial state"))
    }

    /// Teacher-forced decoder inputs and targets for a gold gloss sequence.
    fn decoder_io(&self, gold: &[usize]) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut inputs = Vec::with_capacity(gold.len() + 1);
        inputs.push(tokenizer::SOS);
        inputs.extend_from_slice(gold);
        let mut targets = gold.to_vec();
        targets.push(tokenizer::EOS);
        (one_hot_inputs(&inputs, self.target_vocab.len()), targets)
    }

    /// Summed teacher-forced cross-entropy and the number of predicted tokens.
    pub fn pair_loss(&self, source: &str, target: &[String]) -> Result<(f64, usize), RnnError> {
        let enc_final = self.encode(source)?;
        let (dec_in, dec_tgt) = self.decoder_io(&self.target_indices(target));
        let (states, _) = self.decoder.forward(&dec_in, &enc_final)?;
        let mut loss = 0.0;
        for (s, &t) in states[1..].iter().zip(&dec_tgt) {
            loss += cross_entropy(&self.head.predict(&s.a)?, t)?;
        }
        Ok((loss, dec_tgt.len()))
    }

    /// Loss and full gradient for one pair, by BPTT through the decoder, the
    /// state handoff, and the encoder.
    pub fn pair_gradients(&self, source: &str, target: &[String]) -> Result<(f64, usize, ModelGradients), RnnError> {
        let n = self.n_hidden();
        let enc_x = one_hot_inputs(&self.source_indices(source), self.source_vocab.len());
        let (enc_states, enc_caches) = self.encoder.forward(&enc_x, &LstmState::zeros(n))?;
        let handoff = enc_states.last().unwrap();
        let (dec_in, dec_tgt) = self.decoder_io(&self.target_indices(target));
        let (dec_states, dec_caches) = self.decoder.forward(&dec_in, handoff)?;

        let mut head_grads = self.head.zeros_like();
        let mut loss = 0.0;
        let mut d_a = Vec::with_capacity(dec_tgt.len());
        for (s, &t) in dec_states[1..].iter().zip(&dec_tgt) {
            let probs = self.head.predict(&s.a)?;
            loss += cross_entropy(&probs, t)?;
            d_a.push(self.head.backward(&s.a, &probs, t, &mut head_grads));
        }
        let (dec_grads, d_handoff) = self.decoder.backward(&dec_caches, &d_a, &LstmState::zeros(n))?;
        let enc_upstream = vec![vec![0.0; n]; enc_caches.len()];
        let (enc_grads, _) = self.encoder.backward(&enc_caches, &enc_upstream, &d_handoff)?;
        Ok((
            loss,
            dec_tgt.len(),
            ModelGradients {
                encoder: enc_grads,
                decoder: dec_grads,
                head: head_grads,
            },
        ))
    }

    /// Greedy decoding. Stops at `EOS` or after `max_decode_len` tokens.
    pub fn translate_indices(&self, text: &str) -> Result<TokenSequence, RnnError> {
        let mut state = self.encode(text)?;
        let v = self.target_vocab.len();
        let mut out = Vec::new();
        let mut prev = tokenizer::SOS;
        for _ in 0..self.max_decode_len {
            let x = one_hot_inputs(&[prev], v).pop().unwrap();
            state = self.decoder.cell_forward(&x, &state)?.0;
            let probs = self.head.predict(&state.a)?;
            let next = argmax_excluding(&probs, &[tokenizer::PAD, tokenizer::SOS, tokenizer::UNK]);
            if next == tokenizer::EOS {
                break;
            }
            out.push(next);
            prev = next;
        }
        Ok(TokenSequence(out))
    }

    /// Translates a sentence into gloss tokens.
    pub fn translate(&self, text: &str) -> Result<Vec<String>, Seq2SeqError> {
        let idx = self.translate_indices(text)?;
        Ok(self.target_vocab.decode(&idx)?)
    }

    /// Mean teacher-forced cross-entropy per target token over `corpus`.
    pub fn mean_loss(&self, corpus: &ParallelCorpus) -> Result<f64, RnnError> {
        let (mut total, mut count) = (0.0, 0usize);
        for p in corpus {
            let (l, n) = self.pair_loss(p.source(), p.target())?;
            total += l;
            count += n;
        }
        Ok(if count == 0 { 0.0 } else { total / count as f64 })
    }

    pub fn evaluate(&self, corpus: &ParallelCorpus) -> Result<Metrics, Seq2SeqError> {
        let predictions = corpus
            .iter()
            .map(|p| self.translate(p.source()))
            .collect::<Result<Vec<_>, _>>()?;
        let golds: Vec<Vec<String>> = corpus.iter().map(|p| p.target().to_vec()).collect();
        score(&predictions, &golds)
    }
}

/// Exact-match rate and position-wise token accuracy (matches over total
/// gold length; positions missing from a short prediction count as misses).
pub fn score(predictions: &[Vec<String>], golds: &[Vec<String>]) -> Result<Metrics, Seq2SeqError> {
    if golds.is_empty() || predictions.len() != golds.len() {
        return Err(Seq2SeqError::EmptyCorpus);
    }
    let exact = predictions.iter().zip(golds).filter(|(p, g)| p == g).count();
    let (mut hits, mut total) = (0usize, 0usize);
    for (p, g) in predictions.iter().zip(golds) {
        total += g.len();
        hits += g.iter().zip(p).filter(|(a, b)| a == b).count();
    }
    Ok(Metrics {
        exact_match_rate: exact as f64 / golds.len() as f64,
        token_accuracy: if total == 0 { 1.0 } else { hits as f64 / total as f64 },
    })
}

fn argmax_excluding(probs: &[f64], excluded: &[usize]) -> usize {
    let mut best = None;
    for (i, &p) in probs.iter().enumerate() {
        if excluded.contains(&i) {
            continue;
        }
        match best {
            Some((_, bp)) if p <= bp => {}
            _ => best = Some((i, p)),
        }
    }
    best.map(|(i, _)| i).unwrap_or(tokenizer::EOS)
}

/// Trains a fresh model on `corpus`.
///
/// The corpus is split with [`ParallelCorpus::split_train_val`]; vocabularies
/// cover the whole corpus. Parameters are initialized from a ChaCha8 stream
/// seeded with `config.seed`, and the same stream then shuffles the training
/// pairs at the start of every epoch. Each pair is one RMSprop update on the
/// clipped gradient of its summed token loss.
pub fn train(corpus: &ParallelCorpus, config: &TrainingConfig) -> Result<(Seq2SeqModel, LossHistory), Seq2SeqError> {
    config.validate()?;
    if corpus.len() < 2 && config.val_fraction > 0.0 {
        return Err(CorpusError::TooSmall(corpus.len()).into());
    }
    let (train_set, val_set) = if config.val_fraction > 0.0 {
        corpus.split_train_val(config.val_fraction, config.seed)?
    } else {
        (corpus.clone(), ParallelCorpus::default())
    };
    if train_set.is_empty() {
        return Err(Seq2SeqError::EmptyTraining);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = Seq2SeqModel::new(corpus, config, &mut rng);
    let history = train_model(&mut model, &train_set, &val_set, config, &mut rng)?;
    Ok((model, history))
}

/// Runs the epoch loop on an existing model.
pub fn train_model(
    model: &mut Seq2SeqModel,
    train_set: &ParallelCorpus,
    val_set: &ParallelCorpus,
    config: &TrainingConfig,
    rng: &mut ChaCha8Rng,
) -> Result<LossHistory, Seq2SeqError> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Seq2SeqError::EmptyTraining);
    }
    let opt = RmsProp::new(config.learning_rate, config.beta);
    let mut opt_state = OptimizerState::for_shapes(model.tensors());
    let mut history = LossHistory::default();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=config.epochs {
        order.shuffle(rng);
        let (mut total, mut count) = (0.0, 0usize);
        for &i in &order {
            let pair = &train_set.pairs()[i];
            let (loss, n, mut grads) = model.pair_gradients(pair.source(), pair.target())?;
            if !loss.is_finite() {
                return Err(Seq2SeqError::NonFiniteLoss {
                    epoch,
                    source_text: pair.source().to_string(),
                });
            }
            total += loss;
            count += n;
            clip_global_norm(grads.tensors_mut(), config.clip_norm);
            opt.step(model.tensors_mut(), &grads.tensors(), &mut opt_state);
        }
        history.train.push(total / count as f64);
        let val = if val_set.is_empty() {
            None
        } else {
            let v = model.mean_loss(val_set)?;
            if !v.is_finite() {
                return Err(Seq2SeqError::NonFiniteLoss {
                    epoch,
                    source_text: "<validation>".into(),
                });
            }
            Some(v)
        };
        history.val.push(val);
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> TrainingConfig {
        TrainingConfig {
            n_hidden: 16,
            epochs: 3,
            learning_rate: 0.01,
            ..TrainingConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrainingConfig::default().validate().is_ok());
        let bad = [
            TrainingConfig {
                epochs: 0,
                ..small_config()
            },
            TrainingConfig {
                learning_rate: 0.0,
                ..small_config()
            },
            TrainingConfig {
                val_fraction: 1.0,
                ..small_config()
            },
            TrainingConfig {
                beta: 1.0,
                ..small_config()
            },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Seq2SeqError::Config(_))), "{c:?}");
        }
    }

    #[test]
    fn handoff_is_bitwise_copy() {
        let corpus = ParallelCorpus::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let model = Seq2SeqModel::new(&corpus, &small_config(), &mut rng);
        let enc = model.encode("¿Qué tal?").unwrap();
        // the decoder's first step from the handoff equals a step from a copy
        let x = one_hot_inputs(&[tokenizer::SOS], model.target_vocab.len())
            .pop()
            .unwrap();
        let (s1, _) = model.decoder.cell_forward(&x, &enc).unwrap();
        let (states, _) = model.decoder.forward(&[x], &enc).unwrap();
        assert_eq!(states[0], enc);
        assert_eq!(states[1], s1);
    }

    #[test]
    fn empty_input_decodes_from_zero_state() {
        let corpus = ParallelCorpus::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = Seq2SeqModel::new(&corpus, &small_config(), &mut rng);
        assert_eq!(model.encode("").unwrap(), LstmState::zeros(16));
        let out = model.translate_indices("").unwrap();
        assert!(out.len() <= model.max_decode_len);
    }

    #[test]
    fn score_definitions() {
        let g = vec![vec!["Tú".to_string(), "Bien".to_string()], vec!["Yo".to_string()]];
        let m = score(&g, &g).unwrap();
        assert_eq!((m.exact_match_rate, m.token_accuracy), (1.0, 1.0));
        let p = vec![vec!["Tú".to_string()], vec!["Tú".to_string()]];
        let m = score(&p, &g).unwrap();
        assert_eq!(m.exact_match_rate, 0.0);
        assert!((m.token_accuracy - 1.0 / 3.0).abs() < 1e-15);
        assert!(score(&[], &[]).is_err());
    }

    #[test]
    fn evaluate_on_empty_corpus_errors() {
        let corpus = ParallelCorpus::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = Seq2SeqModel::new(&corpus, &small_config(), &mut rng);
        assert!(matches!(
            model.evaluate(&ParallelCorpus::default()),
            Err(Seq2SeqError::EmptyCorpus)
        ));
    }

    #[test]
    fn history_csv_layout() {
        let h = LossHistory {
            train: vec![2.0, 1.5],
            val: vec![Some(2.5), None],
        };
        assert_eq!(h.to_csv(), "epoch,train_loss,val_loss\n1,2,2.5\n2,1.5,\n");
    }

    #[test]
    fn training_is_bit_reproducible() {
        let corpus = ParallelCorpus::builtin();
        let (m1, h1) = train(&corpus, &small_config()).unwrap();
        let (m2, h2) = train(&corpus, &small_config()).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(m1, m2);
        assert_eq!(h1.len(), 3);
        assert!(h1.val.iter().all(|v| v.is_some()));
    }
}
