//! Independent reference implementations shared by the oracle and
//! acceptance tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signbot::rnn::{
    bptt, sequence_loss, InitConfig, LstmParams, LstmState, OutputActivation, SequenceExample, SoftmaxHead,
};

/// Scalar transcription of the cell equations, element by element.
pub fn scalar_cell(p: &LstmParams, x: &[f64], a_prev: &[f64], c_prev: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = a_prev.len();
    let mut z = a_prev.to_vec();
    z.extend_from_slice(x);
    let lin = |w: &signbot::rnn::Matrix, b: &[f64], r: usize| {
        let mut s = b[r];
        for (j, zj) in z.iter().enumerate() {
            s += w.get(r, j) * zj;
        }
        s
    };
    let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
    let mut a = vec![0.0; n];
    let mut c = vec![0.0; n];
    for r in 0..n {
        let cand = lin(&p.w_c, &p.b_c, r).tanh();
        let u = sig(lin(&p.w_u, &p.b_u, r));
        let f = sig(lin(&p.w_f, &p.b_f, r));
        let o = sig(lin(&p.w_o, &p.b_o, r));
        c[r] = u * cand + f * c_prev[r];
        a[r] = match p.output {
            OutputActivation::Identity => o * c[r],
            OutputActivation::Tanh => o * c[r].tanh(),
        };
    }
    (a, c)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

pub fn randomize_biases(p: &mut LstmParams, rng: &mut ChaCha8Rng) {
    for b in [&mut p.b_c, &mut p.b_u, &mut p.b_f, &mut p.b_o] {
        for v in b.iter_mut() {
            *v = rng.gen_range(-0.5..0.5);
        }
    }
}

pub fn one_hot(i: usize, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

pub fn random_example(rng: &mut ChaCha8Rng, n_in: usize, vocab: usize, len: usize, dense: bool) -> SequenceExample {
    SequenceExample {
        inputs: (0..len)
            .map(|_| {
                if dense {
                    random_vec(rng, n_in, 1.0)
                } else {
                    one_hot(rng.gen_range(0..n_in), n_in)
                }
            })
            .collect(),
        targets: (0..len).map(|_| rng.gen_range(0..vocab)).collect(),
    }
}

/// Every parameter entry perturbed by ±h; returns the max relative error.
pub fn gradient_check(seed: u64, n_h: usize, vocab: usize, len: usize, output: OutputActivation) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_in = vocab;
    let mut lstm = LstmParams::init(
        n_in,
        n_h,
        InitConfig {
            weight_scale: 1.5,
            forget_bias: 1.0,
        },
        &mut rng,
    );
    randomize_biases(&mut lstm, &mut rng);
    lstm.output = output;
    let mut head = SoftmaxHead::init(n_h, vocab, 1.5, &mut rng);
    for b in head.b_y.iter_mut() {
        *b = rng.gen_range(-0.3..0.3);
    }
    let init = LstmState {
        a: random_vec(&mut rng, n_h, 0.5),
        c: random_vec(&mut rng, n_h, 0.5),
    };
    let examples = vec![
        random_example(&mut rng, n_in, vocab, len, seed.is_multiple_of(2)),
        random_example(&mut rng, n_in, vocab, len.max(1) - 1, false),
    ];
    let (_, grads) = bptt(&lstm, &head, &init, &examples).unwrap();

    let loss = |l: &LstmParams, h: &SoftmaxHead| -> f64 {
        examples.iter().map(|e| sequence_loss(l, h, &init, e).unwrap()).sum()
    };
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    let mut check = |analytic: f64, plus: f64, minus: f64| {
        let numeric = (plus - minus) / (2.0 * step);
        let denom = analytic.abs().max(numeric.abs()).max(1e-7);
        worst = worst.max((analytic - numeric).abs() / denom);
    };
    let analytic_lstm: Vec<Vec<f64>> = grads.lstm.tensors().iter().map(|t| t.to_vec()).collect();
    for (ti, g) in analytic_lstm.iter().enumerate() {
        for (k, &analytic) in g.iter().enumerate() {
            let mut lp = lstm.clone();
            lp.tensors_mut()[ti][k] += step;
            let mut lm = lstm.clone();
            lm.tensors_mut()[ti][k] -= step;
            check(analytic, loss(&lp, &head), loss(&lm, &head));
        }
    }
    let analytic_head: Vec<Vec<f64>> = grads.head.tensors().iter().map(|t| t.to_vec()).collect();
    for (ti, g) in analytic_head.iter().enumerate() {
        for (k, &analytic) in g.iter().enumerate() {
            let mut hp = head.clone();
            hp.tensors_mut()[ti][k] += step;
            let mut hm = head.clone();
            hm.tensors_mut()[ti][k] -= step;
            check(analytic, loss(&lstm, &hp), loss(&lstm, &hm));
        }
    }
    worst
}
