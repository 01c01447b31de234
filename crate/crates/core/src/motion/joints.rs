use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::MotionError;

/// Shipped limits, also available as `data/joint_limits.txt`.
pub const DEFAULT_JOINT_LIMITS: &str = include_str!("../../../../data/joint_limits.txt");

/// Actuated joints: six per arm plus two in the neck.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Joint {
    RShoulderPitch,
    RShoulderRoll,
    RShoulderYaw,
    RElbow,
    RWristYaw,
    RWristPitch,
    LShoulderPitch,
    LShoulderRoll,
    LShoulderYaw,
    LElbow,
    LWristYaw,
    LWristPitch,
    HeadYaw,
    HeadPitch,
}

impl Joint {
    pub const COUNT: usize = 14;

    pub const ALL: [Joint; Self::COUNT] = [
        Self::RShoulderPitch,
        Self::RShoulderRoll,
        Self::RShoulderYaw,
        Self::RElbow,
        Self::RWristYaw,
        Self::RWristPitch,
        Self::LShoulderPitch,
        Self::LShoulderRoll,
        Self::LShoulderYaw,
        Self::LElbow,
        Self::LWristYaw,
        Self::LWristPitch,
        Self::HeadYaw,
        Self::HeadPitch,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::RShoulderPitch => "r_shoulder_pitch",
            Self::RShoulderRoll => "r_shoulder_roll",
            Self::RShoulderYaw => "r_shoulder_yaw",
            Self::RElbow => "r_elbow",
            Self::RWristYaw => "r_wrist_yaw",
            Self::RWristPitch => "r_wrist_pitch",
            Self::LShoulderPitch => "l_shoulder_pitch",
            Self::LShoulderRoll => "l_shoulder_roll",
            Self::LShoulderYaw => "l_shoulder_yaw",
            Self::LElbow => "l_elbow",
            Self::LWristYaw => "l_wrist_yaw",
            Self::LWristPitch => "l_wrist_pitch",
            Self::HeadYaw => "head_yaw",
            Self::HeadPitch => "head_pitch",
        }
    }
}

impl fmt::Display for Joint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Joint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|j| j.name() == s)
            .ok_or_else(|| format!("unknown joint {s:?}"))
    }
}

/// One angle per joint, radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointConfiguration(pub [f64; Joint::COUNT]);

impl JointConfiguration {
    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn get(&self, j: Joint) -> f64 {
        self.0[j.index()]
    }

    pub fn set(&mut self, j: Joint, angle: f64) {
        self.0[j.index()] = angle;
    }

    pub fn with(mut self, j: Joint, angle: f64) -> Self {
        self.set(j, angle);
        self
    }

    /// Joint-wise linear interpolation, clamped to the segment so that
    /// round-off never leaves the interval between `a` and `b`.
    pub fn lerp(a: &Self, b: &Self, t: f64) -> Self {
        let mut out = [0.0; Joint::COUNT];
        for (i, o) in out.iter_mut().enumerate() {
            let (x, y) = (a.0[i], b.0[i]);
            *o = ((1.0 - t) * x + t * y).clamp(x.min(y), x.max(y));
        }
        Self(out)
    }
}

/// Closed interval `[min, max]` per joint.
#[derive(Debug, Clone, PartialEq)]
pub struct JointLimits {
    bounds: [(f64, f64); Joint::COUNT],
}

impl Default for JointLimits {
    fn default() -> Self {
        Self::from_text(DEFAULT_JOINT_LIMITS).expect("shipped joint limits parse")
    }
}

impl JointLimits {
    pub fn bounds(&self, j: Joint) -> (f64, f64) {
        self.bounds[j.index()]
    }

    pub fn contains(&self, j: Joint, angle: f64) -> bool {
        let (lo, hi) = self.bounds(j);
        angle >= lo && angle <= hi
    }

    /// First joint outside its interval, if any.
    pub fn violation(&self, c: &JointConfiguration) -> Option<(Joint, f64)> {
        Joint::ALL
            .iter()
            .map(|&j| (j, c.get(j)))
            .find(|&(j, a)| !self.contains(j, a))
    }

    /// Lines of `joint min max`; every joint must appear exactly once.
    pub fn from_text(text: &str) -> Result<Self, MotionError> {
        let mut bounds: [Option<(f64, f64)>; Joint::COUNT] = [None; Joint::COUNT];
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: String| MotionError::Parse { line: i + 1, reason };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [name, lo, hi] = fields.as_slice() else {
                return Err(bad("expected `joint min max`".into()));
            };
            let joint: Joint = name.parse().map_err(bad)?;
            let (lo, hi): (f64, f64) = match (lo.parse(), hi.parse()) {
                (Ok(a), Ok(b)) => (a, b),
                _ => return Err(bad("bad number".into())),
            };
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(bad(format!("empty interval for {joint}")));
            }
            if bounds[joint.index()].replace((lo, hi)).is_some() {
                return Err(bad(format!("{joint} listed twice")));
            }
        }
        let mut out = [(0.0, 0.0); Joint::COUNT];
        for j in Joint::ALL {
            out[j.index()] = bounds[j.index()].ok_or(MotionError::Parse {
                line: 0,
                reason: format!("no limits for {j}"),
            })?;
        }
        Ok(Self { bounds: out })
    }

    pub fn load(path: &Path) -> Result<Self, MotionError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}
