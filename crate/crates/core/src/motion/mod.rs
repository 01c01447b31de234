//! Gloss sequences to joint-space motion.
//!
//! A [`MotionLut`] maps each gloss to a [`Trajectory`] of keyframes recorded
//! offline. [`compile_plan`] chains the trajectories of a translated gloss
//! sequence in order, and [`simulate_execution`] plays the plan back on a
//! simulated humanoid, one sign after another with a short pause in between.

mod joints;
mod lut;
mod plan;

use thiserror::Error;

pub use joints::{Joint, JointConfiguration, JointLimits, DEFAULT_JOINT_LIMITS};
pub use lut::{load_lut, Keyframe, MotionLut, Trajectory};
pub use plan::{compile_plan, log_to_csv, simulate_execution, ExecutionPlan, Sample, DEFAULT_INTER_SIGN_PAUSE};

/// Demonstration table covering every gloss of the shipped corpus, also
/// available as `data/demo_lut.txt`. The trajectories are placeholders, not
/// recordings of real signs.
pub const DEMO_LUT: &str = include_str!("../../../../data/demo_lut.txt");

/// [`DEMO_LUT`] parsed against the shipped joint limits.
pub fn demo_lut() -> MotionLut {
    MotionLut::parse(DEMO_LUT, JointLimits::default()).expect("demo table is valid")
}

#[derive(Debug, Error)]
pub enum MotionError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("token {token}: joint {joint} angle {angle} outside its limits")]
    Limit { token: String, joint: Joint, angle: f64 },
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("missing tokens: {}", .0.join(", "))]
    MissingTokens(Vec<String>),
    #[error("sample rate must be positive, got {0}")]
    BadRate(f64),
}
