//! Sequential execution plans and their simulated playback.

use std::fmt::Write as _;

use super::{Joint, JointConfiguration, MotionError, MotionLut, Trajectory};

/// Pause between consecutive signs, seconds.
pub const DEFAULT_INTER_SIGN_PAUSE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExecutionPlan {
    segments: Vec<(String, Trajectory)>,
}

impl ExecutionPlan {
    pub fn segments(&self) -> &[(String, Trajectory)] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Sum of all keyframe durations, pauses excluded.
    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|(_, t)| t.duration()).sum()
    }

    /// Wall-clock length of playback with `pause` seconds between signs.
    pub fn playback_duration(&self, pause: f64) -> f64 {
        self.duration() + pause * self.segments.len().saturating_sub(1) as f64
    }
}

/// Looks up every token in order. Fails without a partial plan when any
/// token is missing, listing each missing token once.
pub fn compile_plan<S: AsRef<str>>(tokens: &[S], lut: &MotionLut) -> Result<ExecutionPlan, MotionError> {
    let mut missing: Vec<String> = Vec::new();
    let mut segments = Vec::with_capacity(tokens.len());
    for t in tokens {
        let t = t.as_ref();
        match lut.get(t) {
            Some(traj) => segments.push((t.to_string(), traj.clone())),
            None if !missing.iter().any(|m| m == t) => missing.push(t.to_string()),
            None => {}
        }
    }
    if !missing.is_empty() {
        return Err(MotionError::MissingTokens(missing));
    }
    Ok(ExecutionPlan { segments })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub config: JointConfiguration,
}

/// Samples playback at `t = k / sample_rate` for every `t` in
/// `[0, playback_duration)`. Within a sign, keyframes are joined linearly;
/// during the pause after a sign its final configuration is held.
pub fn simulate_execution(plan: &ExecutionPlan, sample_rate: f64, pause: f64) -> Result<Vec<Sample>, MotionError> {
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(MotionError::BadRate(sample_rate));
    }
    if !(pause >= 0.0 && pause.is_finite()) {
        return Err(MotionError::InvalidTrajectory(format!("pause {pause}")));
    }
    let total = plan.playback_duration(pause);
    let n = (total * sample_rate - 1e-9).ceil().max(0.0) as usize;
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    let mut seg_start = 0.0;
    for k in 0..n {
        let t = k as f64 / sample_rate;
        // advance past signs (and their trailing pause) that ended before t
        while seg + 1 < plan.segments.len() && t >= seg_start + plan.segments[seg].1.duration() + pause {
            seg_start += plan.segments[seg].1.duration() + pause;
            seg += 1;
        }
        let config = plan.segments[seg].1.sample(t - seg_start);
        out.push(Sample { time: t, config });
    }
    Ok(out)
}

/// CSV with header `time,joint,angle`, one row per sample and joint.
pub fn log_to_csv(samples: &[Sample]) -> String {
    let mut out = String::from("time,joint,angle\n");
    for s in samples {
        for j in Joint::ALL {
            let _ = writeln!(out, "{},{},{}", s.time, j, s.config.get(j));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::Keyframe;

    fn elbow(a: f64) -> JointConfiguration {
        JointConfiguration::zeros().with(Joint::RElbow, a)
    }

    fn lut() -> MotionLut {
        let mut lut = MotionLut::default();
        let kf = |a, d| Keyframe {
            config: elbow(a),
            duration: d,
        };
        lut.record_entry("Tú", Trajectory::new(vec![kf(0.0, 0.5), kf(1.0, 0.25)]).unwrap())
            .unwrap();
        lut.record_entry("Bien", Trajectory::new(vec![kf(2.0, 1.0)]).unwrap())
            .unwrap();
        lut
    }

    #[test]
    fn durations_add_up() {
        let plan = compile_plan(&["Tú", "Bien"], &lut()).unwrap();
        assert_eq!(plan.len(), 2);
        assert_eq!(plan.duration(), 0.75 + 1.0);
        assert_eq!(plan.playback_duration(0.2), 1.75 + 0.2);
    }

    #[test]
    fn empty_plan() {
        let plan = compile_plan::<&str>(&[], &lut()).unwrap();
        assert!(plan.is_empty());
        assert_eq!(plan.duration(), 0.0);
        assert!(simulate_execution(&plan, 10.0, 0.2).unwrap().is_empty());
    }

    #[test]
    fn missing_tokens_are_all_listed() {
        let err = compile_plan(&["Tú", "Zzz", "Qqq", "Zzz"], &lut()).unwrap_err();
        assert_eq!(err.to_string(), "missing tokens: Zzz, Qqq");
    }

    #[test]
    fn held_keyframe_gives_identical_samples() {
        let mut l = MotionLut::default();
        l.record_entry(
            "A",
            Trajectory::new(vec![Keyframe {
                config: elbow(0.7),
                duration: 1.0,
            }])
            .unwrap(),
        )
        .unwrap();
        let s = simulate_execution(&compile_plan(&["A"], &l).unwrap(), 10.0, 0.2).unwrap();
        assert_eq!(s.len(), 10);
        assert!(s.iter().all(|x| x.config == elbow(0.7)));
    }

    #[test]
    fn linear_ramp_samples() {
        let mut l = MotionLut::default();
        let kf = |a, d| Keyframe {
            config: elbow(a),
            duration: d,
        };
        l.record_entry("A", Trajectory::new(vec![kf(0.0, 1.0), kf(1.0, 0.25)]).unwrap())
            .unwrap();
        let s = simulate_execution(&compile_plan(&["A"], &l).unwrap(), 4.0, 0.0).unwrap();
        let angles: Vec<f64> = s.iter().map(|x| x.config.get(Joint::RElbow)).collect();
        assert_eq!(angles, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn pause_holds_previous_sign() {
        let plan = compile_plan(&["Tú", "Bien"], &lut()).unwrap();
        let s = simulate_execution(&plan, 20.0, 0.2).unwrap();
        assert_eq!(s.len(), 39);
        // t = 0.8 and 0.9 fall in the pause after "Tú", which ends at 0.95
        assert_eq!(s[16].config, elbow(1.0));
        assert_eq!(s[18].config, elbow(1.0));
        assert_eq!(s[20].config, elbow(2.0));
    }

    #[test]
    fn rejects_non_positive_rate() {
        let plan = compile_plan(&["Tú"], &lut()).unwrap();
        assert!(simulate_execution(&plan, 0.0, 0.2).is_err());
    }

    #[test]
    fn csv_has_one_row_per_joint() {
        let plan = compile_plan(&["Bien"], &lut()).unwrap();
        let csv = log_to_csv(&simulate_execution(&plan, 2.0, 0.2).unwrap());
        assert!(csv.starts_with("time,joint,angle\n0,r_shoulder_pitch,0\n"));
        assert_eq!(csv.lines().count(), 1 + 2 * Joint::COUNT);
    }
}
