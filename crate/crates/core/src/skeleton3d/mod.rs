//! 3D skeleton acquisition from 2D keypoints and depth frames.
//!
//! Per frame: the depth image is dilated (near regions grow, holes fill),
//! depth is sampled at every keypoint, keypoints are lifted with the pinhole
//! model `p = d·((u − w/2)/f, (v − h/2)/f, 1)`, parts that line up along a
//! camera ray get their depths re-estimated from calibrated limb lengths, and
//! finally a per-part temporal median filter removes spikes.

mod calibration;
mod camera;
mod depth;
pub mod io;
mod occlusion;
mod pipeline;
pub mod sensors;
mod smoothing;
pub mod synthetic;
mod types;

use thiserror::Error;

pub use calibration::{calibrate_limbs, LimbCalibration, MIN_CALIBRATION_FRAMES};
pub use camera::CameraIntrinsics;
pub use depth::DepthImage;
pub use occlusion::{detect_occlusions, group_objective, resolve_occlusions, GroupOutcome, GroupStatus, SolverConfig};
pub use pipeline::{
    lift_keypoints, mean_error, reconstruct_stream, ReconstructionParams, Reconstructor, StreamSummary,
};
pub use sensors::{select_sensor, SensorRequirements, SensorSpec};
pub use smoothing::{median_point, MedianFilter};
pub use types::{BodyPart, Keypoint2D, Limb, Skeleton3D};

#[derive(Debug, Error)]
pub enum SkeletonError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid intrinsics: {0}")]
    Intrinsics(String),
    #[error("depth image: {0}")]
    DepthFormat(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("calibration: {0}")]
    Calibration(String),
    #[error("frame count mismatch: {keypoints} keypoint frames, {depth} depth frames")]
    FrameMismatch { keypoints: usize, depth: usize },
    #[error("no sensor satisfies the requirements")]
    NoSensor,
    #[error("sensor registry: {0}")]
    Registry(String),
}
