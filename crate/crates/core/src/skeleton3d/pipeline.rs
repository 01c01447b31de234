//! Frame-by-frame reconstruction.

use super::{
    detect_occlusions, resolve_occlusions, BodyPart, CameraIntrinsics, DepthImage, GroupOutcome, GroupStatus,
    Keypoint2D, LimbCalibration, MedianFilter, Skeleton3D, SkeletonError, SolverConfig,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionParams {
    /// Dilation kernel radius in pixels; 0 disables dilation.
    pub dilation_radius: u32,
    /// Median window length; 1 disables smoothing.
    pub median_order: usize,
    /// Keypoints closer than this (pixels) are treated as mutually occluding.
    pub occlusion_threshold_px: f64,
    /// Keypoints at or below this confidence are ignored.
    pub min_confidence: f64,
    pub solver: SolverConfig,
}

impl Default for ReconstructionParams {
    fn default() -> Self {
        Self {
            dilation_radius: 3,
            median_order: 5,
            occlusion_threshold_px: 8.0,
            min_confidence: 0.0,
            solver: SolverConfig::default(),
        }
    }
}

/// Samples `depth` (already dilated, if wanted) at each keypoint and lifts it
/// to 3D. Readings outside the sensor range give invalid parts.
pub fn lift_keypoints(
    keypoints: &[Keypoint2D],
    depth: &DepthImage,
    k: &CameraIntrinsics,
    params: &ReconstructionParams,
) -> Skeleton3D {
    let (lo, hi) = params.solver.depth_range;
    let mut skel = Skeleton3D::new();
    for kp in keypoints.iter().filter(|k| k.confidence > params.min_confidence) {
        let Some(d) = depth.sample(kp.u, kp.v) else {
            continue;
        };
        if d < lo || d > hi {
            continue;
        }
        if let Some(p) = k.project(kp.u, kp.v, d) {
            skel.set(kp.part, p);
        }
    }
    skel
}

/// Running totals over a stream.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StreamSummary {
    pub frames: usize,
    pub valid_points: usize,
    pub occlusion_groups: usize,
    pub resolved: usize,
    pub not_converged: usize,
    pub unresolved: usize,
}

/// Stateful reconstructor; the only state carried between frames is the
/// median filter history.
#[derive(Debug, Clone)]
pub struct Reconstructor {
    intrinsics: CameraIntrinsics,
    calibration: LimbCalibration,
    params: ReconstructionParams,
    filter: MedianFilter,
    summary: StreamSummary,
}

impl Reconstructor {
    pub fn new(intrinsics: CameraIntrinsics, calibration: LimbCalibration, params: ReconstructionParams) -> Self {
        Self {
            intrinsics,
            calibration,
            filter: MedianFilter::new(params.median_order),
            params,
            summary: StreamSummary::default(),
        }
    }

    pub fn summary(&self) -> &StreamSummary {
        &self.summary
    }

    /// Runs one frame through dilation, sampling, projection, occlusion
    /// resolution and smoothing, in that order.
    pub fn process(
        &mut self,
        keypoints: &[Keypoint2D],
        depth: &DepthImage,
    ) -> Result<(Skeleton3D, Vec<GroupOutcome>), SkeletonError> {
        if !depth.matches(&self.intrinsics) {
            return Err(SkeletonError::DepthFormat(format!(
                "image is {}x{}, intrinsics expect {}x{}",
                depth.width(),
                depth.height(),
                self.intrinsics.width,
                self.intrinsics.height
            )));
        }
        let dilated;
        let depth = if self.params.dilation_radius > 0 {
            dilated = depth.dilate(self.params.dilation_radius);
            &dilated
        } else {
            depth
        };
        let raw = lift_keypoints(keypoints, depth, &self.intrinsics, &self.params);
        let detected: Vec<Keypoint2D> = keypoints
            .iter()
            .filter(|k| k.confidence > self.params.min_confidence)
            .copied()
            .collect();
        let groups = detect_occlusions(&detected, self.params.occlusion_threshold_px);
        let (resolved, outcomes) = resolve_occlusions(&raw, &groups, &self.calibration, &self.params.solver);
        let smoothed = self.filter.push(&resolved);

        let s = &mut self.summary;
        s.frames += 1;
        s.valid_points += smoothed.valid_count();
        s.occlusion_groups += outcomes.len();
        for o in &outcomes {
            match o.status {
                GroupStatus::Resolved => s.resolved += 1,
                GroupStatus::NotConverged => s.not_converged += 1,
                GroupStatus::Unresolved => s.unresolved += 1,
            }
        }
        Ok((smoothed, outcomes))
    }
}

/// Reconstructs a whole time-aligned stream.
pub fn reconstruct_stream(
    keypoints: &[Vec<Keypoint2D>],
    depth: &[DepthImage],
    k: &CameraIntrinsics,
    calibration: &LimbCalibration,
    params: &ReconstructionParams,
) -> Result<(Vec<Skeleton3D>, StreamSummary), SkeletonError> {
    if keypoints.len() != depth.len() {
        return Err(SkeletonError::FrameMismatch {
            keypoints: keypoints.len(),
            depth: depth.len(),
        });
    }
    let mut rec = Reconstructor::new(*k, calibration.clone(), *params);
    let mut out = Vec::with_capacity(depth.len());
    for (kps, img) in keypoints.iter().zip(depth) {
        out.push(rec.process(kps, img)?.0);
    }
    Ok((out, rec.summary.clone()))
}

/// Mean Euclidean error over the parts valid in both skeletons, and the
/// number of such parts.
pub fn mean_error(estimates: &[Skeleton3D], truth: &[Skeleton3D]) -> (f64, usize) {
    let mut sum = 0.0;
    let mut n = 0;
    for (e, t) in estimates.iter().zip(truth) {
        for part in BodyPart::ALL {
            if let (Some(a), Some(b)) = (e.get(part), t.get(part)) {
                sum += (a - b).norm();
                n += 1;
            }
        }
    }
    (if n == 0 { 0.0 } else { sum / n as f64 }, n)
}
