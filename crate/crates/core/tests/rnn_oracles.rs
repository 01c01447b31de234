//! Independent oracles for the recurrent layer: a scalar-loop LSTM cell and
//! central finite differences for BPTT.

mod common;

use common::{gradient_check, random_example, random_vec, randomize_biases, scalar_cell};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signbot::rnn::{bptt, softmax, InitConfig, LstmParams, LstmState, OutputActivation, SequenceExample, SoftmaxHead};

#[test]
fn vectorized_cell_matches_scalar_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xce11);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n_in = rng.gen_range(1..7);
        let n_h = if case < 50 { 4 } else { rng.gen_range(1..9) };
        let mut p = LstmParams::init(
            n_in,
            n_h,
            InitConfig {
                weight_scale: 2.0,
                forget_bias: 0.3,
            },
            &mut rng,
        );
        randomize_biases(&mut p, &mut rng);
        if case % 2 == 1 {
            p.output = OutputActivation::Tanh;
        }
        let x = random_vec(&mut rng, n_in, 1.5);
        let prev = LstmState {
            a: random_vec(&mut rng, n_h, 1.0),
            c: random_vec(&mut rng, n_h, 2.0),
        };
        let (s, cache) = p.cell_forward(&x, &prev).unwrap();
        let (a_ref, c_ref) = scalar_cell(&p, &x, &prev.a, &prev.c);
        for (v, r) in s.a.iter().zip(&a_ref).chain(s.c.iter().zip(&c_ref)) {
            worst = worst.max((v - r).abs());
        }
        let (u, f, o) = cache.gates();
        assert!(u.iter().chain(f).chain(o).all(|&g| g > 0.0 && g < 1.0));
        assert!(cache.candidate().iter().all(|&c| c > -1.0 && c < 1.0));
    }
    assert!(worst < 1e-12, "max deviation {worst:e}");
}

#[test]
fn chained_calls_equal_unrolled_forward() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = LstmParams::init(5, 4, InitConfig::default(), &mut rng);
    let xs: Vec<Vec<f64>> = (0..3).map(|_| random_vec(&mut rng, 5, 1.0)).collect();
    let init = LstmState::zeros(4);
    let (states, _) = p.forward(&xs, &init).unwrap();
    let mut s = init.clone();
    for (t, x) in xs.iter().enumerate() {
        s = p.cell_forward(x, &s).unwrap().0;
        assert_eq!(s, states[t + 1]);
        if t == 0 {
            assert_eq!(states.len(), 4);
        }
    }
}

#[test]
fn bptt_matches_finite_differences_tiny_model() {
    let worst = gradient_check(1, 3, 4, 3, OutputActivation::Identity);
    assert!(worst < 1e-5, "relative error {worst:e}");
}

#[test]
fn bptt_matches_finite_differences_tanh_variant() {
    let worst = gradient_check(2, 3, 4, 3, OutputActivation::Tanh);
    assert!(worst < 1e-5, "relative error {worst:e}");
}

#[test]
fn zero_length_sequence_has_zero_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let lstm = LstmParams::init(4, 3, InitConfig::default(), &mut rng);
    let head = SoftmaxHead::init(3, 4, 1.0, &mut rng);
    let ex = SequenceExample {
        inputs: vec![],
        targets: vec![],
    };
    let (loss, g) = bptt(&lstm, &head, &LstmState::zeros(3), &[ex]).unwrap();
    assert_eq!(loss, 0.0);
    assert!(g.tensors().iter().all(|t| t.iter().all(|&v| v == 0.0)));
}

#[test]
fn duplicated_example_doubles_gradient_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let lstm = LstmParams::init(4, 3, InitConfig::default(), &mut rng);
    let head = SoftmaxHead::init(3, 4, 1.0, &mut rng);
    let ex = random_example(&mut rng, 4, 4, 3, false);
    let init = LstmState::zeros(3);
    let (l1, g1) = bptt(&lstm, &head, &init, std::slice::from_ref(&ex)).unwrap();
    let (l2, g2) = bptt(&lstm, &head, &init, &[ex.clone(), ex]).unwrap();
    assert_eq!(l2, 2.0 * l1);
    for (a, b) in g1.tensors().iter().zip(g2.tensors()) {
        for (x, y) in a.iter().zip(b) {
            assert_eq!(2.0 * x, *y);
        }
    }
}

#[test]
fn softmax_matches_naive_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let z = random_vec(&mut rng, 6, 3.0);
        let p = softmax(&z);
        let exps: Vec<f64> = z.iter().map(|v| v.exp()).collect();
        let sum: f64 = exps.iter().sum();
        for (pi, e) in p.iter().zip(&exps) {
            assert!((pi - e / sum).abs() < 1e-12);
            assert!(*pi > 0.0);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
