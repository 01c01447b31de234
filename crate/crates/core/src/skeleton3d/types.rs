use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;

use super::SkeletonError;

/// Tracked body parts. Names follow the `side_part` convention used in the
/// keypoint and reconstruction files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BodyPart {
    Nose,
    Neck,
    RShoulder,
    RElbow,
    RWrist,
    LShoulder,
    LElbow,
    LWrist,
    RHip,
    RKnee,
    RAnkle,
    LHip,
    LKnee,
    LAnkle,
    RHand,
    LHand,
}

impl BodyPart {
    pub const COUNT: usize = 16;

    pub const ALL: [BodyPart; Self::COUNT] = [
        Self::Nose,
        Self::Neck,
        Self::RShoulder,
        Self::RElbow,
        Self::RWrist,
        Self::LShoulder,
        Self::LElbow,
        Self::LWrist,
        Self::RHip,
        Self::RKnee,
        Self::RAnkle,
        Self::LHip,
        Self::LKnee,
        Self::LAnkle,
        Self::RHand,
        Self::LHand,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Nose => "nose",
            Self::Neck => "neck",
            Self::RShoulder => "r_shoulder",
            Self::RElbow => "r_elbow",
            Self::RWrist => "r_wrist",
            Self::LShoulder => "l_shoulder",
            Self::LElbow => "l_elbow",
            Self::LWrist => "l_wrist",
            Self::RHip => "r_hip",
            Self::RKnee => "r_knee",
            Self::RAnkle => "r_ankle",
            Self::LHip => "l_hip",
            Self::LKnee => "l_knee",
            Self::LAnkle => "l_ankle",
            Self::RHand => "r_hand",
            Self::LHand => "l_hand",
        }
    }
}

impl fmt::Display for BodyPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BodyPart {
    type Err = SkeletonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| SkeletonError::Parse(format!("unknown body part {s:?}")))
    }
}

/// A segment between two parts whose length stays fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Limb(pub BodyPart, pub BodyPart);

impl Limb {
    pub fn name(self) -> String {
        format!("{}-{}", self.0, self.1)
    }

    pub fn touches(self, part: BodyPart) -> bool {
        self.0 == part || self.1 == part
    }

    pub fn other(self, part: BodyPart) -> Option<BodyPart> {
        if self.0 == part {
            Some(self.1)
        } else if self.1 == part {
            Some(self.0)
        } else {
            None
        }
    }

    /// Shoulder girdle and both arms down to the wrists.
    pub const ARMS: [Limb; 6] = [
        Limb(BodyPart::Neck, BodyPart::RShoulder),
        Limb(BodyPart::RShoulder, BodyPart::RElbow),
        Limb(BodyPart::RElbow, BodyPart::RWrist),
        Limb(BodyPart::Neck, BodyPart::LShoulder),
        Limb(BodyPart::LShoulder, BodyPart::LElbow),
        Limb(BodyPart::LElbow, BodyPart::LWrist),
    ];

    /// Arms plus head and hands.
    pub const UPPER_BODY: [Limb; 9] = [
        Limb(BodyPart::Neck, BodyPart::Nose),
        Limb(BodyPart::Neck, BodyPart::RShoulder),
        Limb(BodyPart::RShoulder, BodyPart::RElbow),
        Limb(BodyPart::RElbow, BodyPart::RWrist),
        Limb(BodyPart::RWrist, BodyPart::RHand),
        Limb(BodyPart::Neck, BodyPart::LShoulder),
        Limb(BodyPart::LShoulder, BodyPart::LElbow),
        Limb(BodyPart::LElbow, BodyPart::LWrist),
        Limb(BodyPart::LWrist, BodyPart::LHand),
    ];

    /// Torso-to-hip links and legs.
    pub const LEGS: [Limb; 6] = [
        Limb(BodyPart::Neck, BodyPart::RHip),
        Limb(BodyPart::RHip, BodyPart::RKnee),
        Limb(BodyPart::RKnee, BodyPart::RAnkle),
        Limb(BodyPart::Neck, BodyPart::LHip),
        Limb(BodyPart::LHip, BodyPart::LKnee),
        Limb(BodyPart::LKnee, BodyPart::LAnkle),
    ];

    pub fn all() -> Vec<Limb> {
        Self::UPPER_BODY.iter().chain(&Self::LEGS).copied().collect()
    }
}

impl fmt::Display for Limb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

impl FromStr for Limb {
    type Err = SkeletonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once('-')
            .ok_or_else(|| SkeletonError::Parse(format!("bad limb {s:?}")))?;
        Ok(Limb(a.parse()?, b.parse()?))
    }
}

/// Detected 2D keypoint. A confidence of 0 means "not detected".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint2D {
    pub part: BodyPart,
    pub u: f64,
    pub v: f64,
    pub confidence: f64,
}

impl Keypoint2D {
    pub fn new(part: BodyPart, u: f64, v: f64, confidence: f64) -> Self {
        Self { part, u, v, confidence }
    }
}

/// 3D skeleton in the camera frame (meters, `z` forward).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Skeleton3D {
    joints: [Option<Vector3<f64>>; BodyPart::COUNT],
}

impl Skeleton3D {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, part: BodyPart) -> Option<Vector3<f64>> {
        self.joints[part.index()]
    }

    pub fn is_valid(&self, part: BodyPart) -> bool {
        self.joints[part.index()].is_some()
    }

    /// Stores a point; non-finite points or points not in front of the camera
    /// are stored as invalid.
    pub fn set(&mut self, part: BodyPart, p: Vector3<f64>) {
        self.joints[part.index()] = if p.iter().all(|v| v.is_finite()) && p.z > 0.0 {
            Some(p)
        } else {
            None
        };
    }

    pub fn invalidate(&mut self, part: BodyPart) {
        self.joints[part.index()] = None;
    }

    pub fn iter(&self) -> impl Iterator<Item = (BodyPart, Vector3<f64>)> + '_ {
        BodyPart::ALL.iter().filter_map(move |&p| self.get(p).map(|v| (p, v)))
    }

    pub fn valid_count(&self) -> usize {
        self.joints.iter().filter(|j| j.is_some()).count()
    }

    pub fn limb_length(&self, limb: Limb) -> Option<f64> {
        Some((self.get(limb.0)? - self.get(limb.1)?).norm())
    }
}
