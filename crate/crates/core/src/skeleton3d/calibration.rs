//! Reference limb lengths measured while every limb is visible.

use std::collections::BTreeMap;
use std::path::Path;

use super::{Limb, Skeleton3D, SkeletonError};

/// Minimum number of frames with both endpoints visible, per limb.
pub const MIN_CALIBRATION_FRAMES: usize = 10;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LimbCalibration {
    lengths: BTreeMap<Limb, f64>,
}

impl LimbCalibration {
    pub fn from_lengths<I: IntoIterator<Item = (Limb, f64)>>(lengths: I) -> Result<Self, SkeletonError> {
        let lengths: BTreeMap<Limb, f64> = lengths.into_iter().collect();
        if let Some((l, v)) = lengths.iter().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(SkeletonError::Calibration(format!("limb {l} has length {v}")));
        }
        Ok(Self { lengths })
    }

    pub fn length(&self, limb: Limb) -> Option<f64> {
        self.lengths.get(&limb).copied()
    }

    pub fn limbs(&self) -> impl Iterator<Item = (Limb, f64)> + '_ {
        self.lengths.iter().map(|(l, v)| (*l, *v))
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// Lines of `limb length_m`, e.g. `r_elbow-r_wrist 0.26`.
    pub fn to_text(&self) -> String {
        self.lengths.iter().map(|(l, v)| format!("{l} {v}\n")).collect()
    }

    pub fn from_text(text: &str) -> Result<Self, SkeletonError> {
        let mut lengths = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(l), Some(v), None) = (it.next(), it.next(), it.next()) else {
                return Err(SkeletonError::Parse(format!("calibration line {}: {line:?}", i + 1)));
            };
            let v: f64 = v
                .parse()
                .map_err(|_| SkeletonError::Parse(format!("calibration line {}: bad length", i + 1)))?;
            lengths.push((l.parse()?, v));
        }
        Self::from_lengths(lengths)
    }

    pub fn save(&self, path: &Path) -> Result<(), SkeletonError> {
        crate::fsutil::write_atomic(path, self.to_text().as_bytes())
            .map_err(|e| SkeletonError::Io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self, SkeletonError> {
        let text = std::fs::read_to_string(path).map_err(|e| SkeletonError::Io(path.display().to_string(), e))?;
        Self::from_text(&text)
    }
}

/// Median endpoint distance of every limb in `limbs` over the frames where
/// both endpoints are valid.
pub fn calibrate_limbs(frames: &[Skeleton3D], limbs: &[Limb]) -> Result<LimbCalibration, SkeletonError> {
    if frames.len() < MIN_CALIBRATION_FRAMES {
        return Err(SkeletonError::Calibration(format!(
            "insufficient calibration frames: {} given, {MIN_CALIBRATION_FRAMES} needed",
            frames.len()
        )));
    }
    let mut lengths = Vec::new();
    let mut missing = Vec::new();
    for &limb in limbs {
        let mut samples: Vec<f64> = frames.iter().filter_map(|f| f.limb_length(limb)).collect();
        if samples.len() < MIN_CALIBRATION_FRAMES {
            missing.push(format!("{limb} ({} frames)", samples.len()));
            continue;
        }
        samples.sort_by(f64::total_cmp);
        let n = samples.len();
        let median = if n % 2 == 1 {
            samples[n / 2]
        } else {
            0.5 * (samples[n / 2 - 1] + samples[n / 2])
        };
        lengths.push((limb, median));
    }
    if !missing.is_empty() {
        return Err(SkeletonError::Calibration(format!(
            "insufficient clean frames for limbs: {}",
            missing.join(", ")
        )));
    }
    LimbCalibration::from_lengths(lengths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton3d::BodyPart;
    use nalgebra::Vector3;

    fn rigid() -> Skeleton3D {
        let mut s = Skeleton3D::new();
        s.set(BodyPart::Neck, Vector3::new(0.0, -0.4, 2.0));
        s.set(BodyPart::RShoulder, Vector3::new(-0.18, -0.4, 2.0));
        s.set(BodyPart::RElbow, Vector3::new(-0.2, -0.1, 2.05));
        s
    }

    #[test]
    fn too_few_frames() {
        let err = calibrate_limbs(&vec![rigid(); 3], &Limb::ARMS).unwrap_err();
        assert!(err.to_string().contains("insufficient calibration frames"), "{err}");
    }

    #[test]
    fn missing_limbs_are_listed() {
        let err = calibrate_limbs(&vec![rigid(); 12], &Limb::ARMS).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("r_elbow-r_wrist") && msg.contains("neck-l_shoulder"),
            "{msg}"
        );
        assert!(!msg.contains("neck-r_shoulder"), "{msg}");
    }

    #[test]
    fn text_round_trip() {
        let limbs = [
            Limb(BodyPart::Neck, BodyPart::RShoulder),
            Limb(BodyPart::RShoulder, BodyPart::RElbow),
        ];
        let c = calibrate_limbs(&vec![rigid(); 10], &limbs).unwrap();
        assert_eq!(LimbCalibration::from_text(&c.to_text()).unwrap(), c);
        assert!(LimbCalibration::from_text("neck-nose -1").is_err());
        assert!(LimbCalibration::from_text("neck-nose").is_err());
    }
}
