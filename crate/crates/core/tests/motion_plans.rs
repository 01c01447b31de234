//! Properties of the demo motion table, plan compilation and playback.

use proptest::prelude::*;
use signbot::motion::{
    compile_plan, demo_lut, simulate_execution, Joint, JointLimits, MotionLut, DEFAULT_INTER_SIGN_PAUSE,
};
use signbot::tokenizer::{Side, Vocabulary};
use signbot::ParallelCorpus;

fn corpus_glosses() -> Vec<String> {
    let vocab = Vocabulary::build(&ParallelCorpus::builtin(), Side::Target);
    vocab
        .tokens()
        .iter()
        .filter(|t| !signbot::tokenizer::SPECIALS.contains(&t.as_str()))
        .cloned()
        .collect()
}

#[test]
fn demo_table_covers_every_corpus_gloss() {
    let lut = demo_lut();
    let glosses = corpus_glosses();
    assert_eq!(glosses.len(), 48);
    let missing: Vec<&String> = glosses.iter().filter(|g| lut.get(g).is_none()).collect();
    assert!(missing.is_empty(), "{missing:?}");
}

#[test]
fn demo_table_file_matches_embedded_copy() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/demo_lut.txt");
    let lut = signbot::motion::load_lut(std::path::Path::new(path)).unwrap();
    assert_eq!(lut, demo_lut());
}

#[test]
fn full_vocabulary_plan_stays_within_limits() {
    let lut = demo_lut();
    let glosses = corpus_glosses();
    let plan = compile_plan(&glosses, &lut).unwrap();
    let limits = JointLimits::default();
    let samples = simulate_execution(&plan, 100.0, DEFAULT_INTER_SIGN_PAUSE).unwrap();
    assert!(!samples.is_empty());
    for s in &samples {
        assert_eq!(limits.violation(&s.config), None, "t = {}", s.time);
    }
}

#[test]
fn save_load_round_trip_of_demo_table() {
    let lut = demo_lut();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lut.txt");
    lut.save(&path).unwrap();
    assert_eq!(MotionLut::load(&path, JointLimits::default()).unwrap(), lut);
}

fn split_point() -> impl Strategy<Value = (Vec<usize>, usize)> {
    (1usize..20).prop_flat_map(|n| (prop::collection::vec(0usize..48, n), 0..=n))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn permuted_plans_last_as_long_as_their_parts(perm in Just((0..48).collect::<Vec<usize>>()).prop_shuffle()) {
        let lut = demo_lut();
        let glosses = corpus_glosses();
        let tokens: Vec<&str> = perm.iter().map(|&i| glosses[i].as_str()).collect();
        let plan = compile_plan(&tokens, &lut).unwrap();
        let parts: f64 = tokens.iter().map(|t| lut.get(t).unwrap().duration()).sum();
        prop_assert_eq!(plan.duration(), parts);
        let order: Vec<&str> = plan.segments().iter().map(|(t, _)| t.as_str()).collect();
        prop_assert_eq!(order, tokens);
    }

    #[test]
    fn duration_is_additive_over_concatenation((idx, cut) in split_point()) {
        let lut = demo_lut();
        let glosses = corpus_glosses();
        let tokens: Vec<&str> = idx.iter().map(|&i| glosses[i].as_str()).collect();
        let whole = compile_plan(&tokens, &lut).unwrap().duration();
        let a = compile_plan(&tokens[..cut], &lut).unwrap().duration();
        let b = compile_plan(&tokens[cut..], &lut).unwrap().duration();
        prop_assert_eq!(whole, a + b);
    }

    #[test]
    fn samples_stay_inside_neighbouring_keyframes(i in 0usize..48, rate in 1.0f64..200.0) {
        let lut = demo_lut();
        let glosses = corpus_glosses();
        let traj = lut.get(&glosses[i]).unwrap();
        let plan = compile_plan(&[glosses[i].as_str()], &lut).unwrap();
        for s in simulate_execution(&plan, rate, 0.0).unwrap() {
            let mut start = 0.0;
            let kfs = traj.keyframes();
            let mut k = kfs.len() - 1;
            for (j, kf) in kfs.iter().enumerate() {
                if s.time < start + kf.duration { k = j; break; }
                start += kf.duration;
            }
            let next = kfs.get(k + 1).unwrap_or(&kfs[k]);
            for joint in Joint::ALL {
                let (a, b) = (kfs[k].config.get(joint), next.config.get(joint));
                let v = s.config.get(joint);
                prop_assert!(v >= a.min(b) && v <= a.max(b));
            }
        }
    }
}
