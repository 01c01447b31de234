//! Gloss → trajectory look-up table and its text format.
//!
//! ```text
//! # comment
//! [Hola]
//! duration=0.5 r_shoulder_pitch=-1.2 r_elbow=1.4
//! duration=0.25 r_shoulder_pitch=-0.3 r_elbow=0.5
//! ```
//!
//! Each `[token]` header opens a block; every following row is one keyframe.
//! Joints a row leaves out are 0.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Joint, JointConfiguration, JointLimits, MotionError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keyframe {
    pub config: JointConfiguration,
    /// Seconds spent moving from this keyframe to the next one, or holding
    /// it when it is the last.
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    keyframes: Vec<Keyframe>,
}

impl Trajectory {
    pub fn new(keyframes: Vec<Keyframe>) -> Result<Self, MotionError> {
        if keyframes.is_empty() {
            return Err(MotionError::InvalidTrajectory("no keyframes".into()));
        }
        if let Some(k) = keyframes.iter().find(|k| !(k.duration > 0.0 && k.duration.is_finite())) {
            return Err(MotionError::InvalidTrajectory(format!("duration {}", k.duration)));
        }
        Ok(Self { keyframes })
    }

    pub fn keyframes(&self) -> &[Keyframe] {
        &self.keyframes
    }

    pub fn duration(&self) -> f64 {
        self.keyframes.iter().map(|k| k.duration).sum()
    }

    pub fn last_config(&self) -> JointConfiguration {
        self.keyframes[self.keyframes.len() - 1].config
    }

    /// Configuration `t` seconds after the start; held at the last keyframe
    /// past the end.
    pub fn sample(&self, t: f64) -> JointConfiguration {
        let mut start = 0.0;
        for (i, k) in self.keyframes.iter().enumerate() {
            let end = start + k.duration;
            if t < end {
                return match self.keyframes.get(i + 1) {
                    Some(next) => {
                        JointConfiguration::lerp(&k.config, &next.config, ((t - start) / k.duration).max(0.0))
                    }
                    None => k.config,
                };
            }
            start = end;
        }
        self.last_config()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MotionLut {
    entries: BTreeMap<String, Trajectory>,
    limits: JointLimits,
}

impl MotionLut {
    pub fn new(limits: JointLimits) -> Self {
        Self {
            entries: BTreeMap::new(),
            limits,
        }
    }

    pub fn limits(&self) -> &JointLimits {
        &self.limits
    }

    pub fn get(&self, token: &str) -> Option<&Trajectory> {
        self.entries.get(token)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn check(&self, token: &str, traj: &Trajectory) -> Result<(), MotionError> {
        for k in traj.keyframes() {
            if let Some((joint, angle)) = self.limits.violation(&k.config) {
                return Err(MotionError::Limit {
                    token: token.to_string(),
                    joint,
                    angle,
                });
            }
        }
        Ok(())
    }

    /// Inserts or replaces the trajectory of `token` after checking limits.
    pub fn record_entry(&mut self, token: &str, traj: Trajectory) -> Result<(), MotionError> {
        if token.is_empty() || token.contains(['[', ']']) || token.chars().any(char::is_whitespace) {
            return Err(MotionError::InvalidTrajectory(format!("bad token name {token:?}")));
        }
        self.check(token, &traj)?;
        self.entries.insert(token.to_string(), traj);
        Ok(())
    }

    pub fn remove(&mut self, token: &str) -> Option<Trajectory> {
        self.entries.remove(token)
    }

    pub fn parse(text: &str, limits: JointLimits) -> Result<Self, MotionError> {
        let mut lut = Self::new(limits);
        let mut current: Option<(String, Vec<Keyframe>, usize)> = None;
        fn finish(lut: &mut MotionLut, block: Option<(String, Vec<Keyframe>, usize)>) -> Result<(), MotionError> {
            if let Some((token, frames, line)) = block {
                if lut.entries.contains_key(&token) {
                    return Err(MotionError::Parse {
                        line,
                        reason: format!("duplicate token {token}"),
                    });
                }
                let traj = Trajectory::new(frames).map_err(|e| MotionError::Parse {
                    line,
                    reason: format!("{token}: {e}"),
                })?;
                lut.record_entry(&token, traj)?;
            }
            Ok(())
        }
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            let line_no = i + 1;
            let bad = |reason: String| MotionError::Parse { line: line_no, reason };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let token = rest
                    .strip_suffix(']')
                    .ok_or_else(|| bad("unterminated header".into()))?;
                finish(&mut lut, current.take())?;
                current = Some((token.trim().to_string(), Vec::new(), line_no));
                continue;
            }
            let Some((_, frames, _)) = current.as_mut() else {
                return Err(bad("keyframe outside a [token] block".into()));
            };
            let mut config = JointConfiguration::zeros();
            let mut duration = None;
            for field in line.split_whitespace() {
                let (key, value) = field
                    .split_once('=')
                    .ok_or_else(|| bad(format!("expected key=value, got {field:?}")))?;
                let value: f64 = value.parse().map_err(|_| bad(format!("bad number in {field:?}")))?;
                if key == "duration" {
                    duration = Some(value);
                } else {
                    let joint: Joint = key.parse().map_err(bad)?;
                    config.set(joint, value);
                }
            }
            let duration = duration.ok_or_else(|| bad("keyframe without duration".into()))?;
            frames.push(Keyframe { config, duration });
        }
        finish(&mut lut, current.take())?;
        Ok(lut)
    }

    /// Writes every joint explicitly so a reload is lossless.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (token, traj) in &self.entries {
            let _ = writeln!(out, "[{token}]");
            for k in traj.keyframes() {
                let _ = write!(out, "duration={}", k.duration);
                for j in Joint::ALL {
                    let _ = write!(out, " {j}={}", k.config.get(j));
                }
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }

    pub fn load(path: &Path, limits: JointLimits) -> Result<Self, MotionError> {
        Self::parse(&std::fs::read_to_string(path)?, limits)
    }

    pub fn save(&self, path: &Path) -> Result<(), MotionError> {
        crate::fsutil::write_atomic(path, self.to_text().as_bytes())?;
        Ok(())
    }
}

/// Loads a LUT file checked against the shipped joint limits.
pub fn load_lut(path: &Path) -> Result<MotionLut, MotionError> {
    MotionLut::load(path, JointLimits::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(elbow: f64, d: f64) -> Trajectory {
        Trajectory::new(vec![Keyframe {
            config: JointConfiguration::zeros().with(Joint::RElbow, elbow),
            duration: d,
        }])
        .unwrap()
    }

    #[test]
    fn empty_text_is_an_empty_lut() {
        assert!(MotionLut::parse("", JointLimits::default()).unwrap().is_empty());
        assert!(MotionLut::parse("# nothing\n\n", JointLimits::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn parses_blocks_and_defaults_missing_joints() {
        let text = "[Tú]\nduration=0.5 r_elbow=1.0\nduration=0.25\n[Bien]\nduration=1 head_pitch=0.2\n";
        let lut = MotionLut::parse(text, JointLimits::default()).unwrap();
        assert_eq!(lut.len(), 2);
        let t = lut.get("Tú").unwrap();
        assert_eq!(t.keyframes().len(), 2);
        assert_eq!(t.duration(), 0.75);
        assert_eq!(t.keyframes()[1].config, JointConfiguration::zeros());
    }

    #[test]
    fn out_of_limit_angle_names_the_joint() {
        let err = MotionLut::parse("[Yo]\nduration=1 r_elbow=3.0\n", JointLimits::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("r_elbow") && msg.contains("Yo"), "{msg}");
    }

    #[test]
    fn malformed_rows_are_rejected() {
        for text in [
            "duration=1\n",
            "[A]\nr_elbow=1\n",
            "[A]\nduration=x\n",
            "[A\nduration=1\n",
            "[A]\nduration=1 knee=1\n",
            "[A]\n",
        ] {
            assert!(MotionLut::parse(text, JointLimits::default()).is_err(), "{text:?}");
        }
    }

    #[test]
    fn record_insert_and_replace() {
        let mut lut = MotionLut::default();
        lut.record_entry("Tú", traj(1.0, 0.5)).unwrap();
        assert_eq!(lut.get("Tú"), Some(&traj(1.0, 0.5)));
        lut.record_entry("Tú", traj(2.0, 0.25)).unwrap();
        assert_eq!(lut.get("Tú"), Some(&traj(2.0, 0.25)));
        assert_eq!(lut.len(), 1);
        assert!(lut.record_entry("Tú", traj(5.0, 0.25)).is_err());
        assert_eq!(lut.get("Tú"), Some(&traj(2.0, 0.25)));
    }

    #[test]
    fn zero_keyframes_rejected() {
        assert!(Trajectory::new(vec![]).is_err());
        assert!(Trajectory::new(vec![Keyframe {
            config: JointConfiguration::zeros(),
            duration: 0.0
        }])
        .is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let mut lut = MotionLut::default();
        lut.record_entry("Tú", traj(1.0 / 3.0, 0.5)).unwrap();
        lut.record_entry("Bien", traj(0.1, 0.125)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lut.txt");
        lut.save(&path).unwrap();
        assert_eq!(load_lut(&path).unwrap(), lut);
    }
}
