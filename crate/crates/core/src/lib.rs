//! Text-to-sign pipeline for a humanoid robot.
//!
//! Spanish sentences are translated into LSE (Spanish Sign Language) gloss
//! sequences by an encoder–decoder LSTM trained from scratch, glosses are
//! looked up in a motion table of joint-space trajectories, and the resulting
//! plan is played back on a simulated humanoid. The [`skeleton3d`] module
//! holds the acquisition side used to record demonstrations: 2D keypoints plus
//! depth frames are lifted to 3D skeletons.
//!
//! Module map:
//!
//! - [`corpus`]: parallel Spanish↔LSE corpus loading and splitting.
//! - [`tokenizer`]: word-level tokenization, vocabularies, one-hot encoding.
//! - [`rnn`]: LSTM cell, softmax head, cross-entropy, BPTT and RMSprop.
//! - [`seq2seq`]: encoder–decoder model, training loop, greedy translation.
//! - [`skeleton3d`]: depth dilation, pinhole projection, median smoothing,
//!   limb calibration, occlusion resolution, and the RGB-D sensor registry.
//! - [`motion`]: gloss → trajectory look-up table, plan compilation and
//!   simulated execution.
//! - [`cli`]: the subcommands behind the `signbot` binary.

pub mod cli;
pub mod corpus;
pub mod fsutil;
pub mod motion;
pub mod rnn;
pub mod seq2seq;
pub mod skeleton3d;
pub mod tokenizer;

pub use corpus::{CorpusPair, ParallelCorpus};
pub use motion::{ExecutionPlan, MotionLut, Trajectory};
pub use seq2seq::{Seq2SeqModel, TrainingConfig};
pub use tokenizer::Vocabulary;

/// Environment variable naming the directory that holds the shipped data
/// files (`lse_corpus.tsv`, `sensors.toml`, `demo_lut.txt`, `joint_limits.txt`).
pub const DATA_DIR_ENV: &str = "SIGNBOT_DATA_DIR";
