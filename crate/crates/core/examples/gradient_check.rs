//! Compares backpropagation through time with central finite differences on
//! a tiny random LSTM and prints the worst relative error per tensor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signbot::rnn::{bptt, sequence_loss, InitConfig, LstmParams, LstmState, SequenceExample, SoftmaxHead};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (n_in, n_h, vocab, len) = (6, 5, 6, 4);
    let lstm = LstmParams::init(n_in, n_h, InitConfig::default(), &mut rng);
    let head = SoftmaxHead::init(n_h, vocab, 1.0, &mut rng);
    let init = LstmState::zeros(n_h);
    let example = SequenceExample {
        inputs: (0..len)
            .map(|_| {
                let mut x = vec![0.0; n_in];
                x[rng.gen_range(0..n_in)] = 1.0;
                x
            })
            .collect(),
        targets: (0..len).map(|_| rng.gen_range(0..vocab)).collect(),
    };
    let examples = [example];
    let (loss, grads) = bptt(&lstm, &head, &init, &examples).expect("shapes agree");
    println!("loss {loss:.6}");

    let h = 1e-5;
    let total = |l: &LstmParams, s: &SoftmaxHead| sequence_loss(l, s, &init, &examples[0]).unwrap();
    let names = ["W_c", "W_u", "W_f", "W_o", "b_c", "b_u", "b_f", "b_o"];
    for (ti, g) in grads.lstm.tensors().iter().enumerate() {
        let mut worst: f64 = 0.0;
        for (k, &analytic) in g.iter().enumerate() {
            let (mut p, mut m) = (lstm.clone(), lstm.clone());
            p.tensors_mut()[ti][k] += h;
            m.tensors_mut()[ti][k] -= h;
            let numeric = (total(&p, &head) - total(&m, &head)) / (2.0 * h);
            worst = worst.max((analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-7));
        }
        println!("{:<4} max relative error {worst:.2e}", names[ti]);
    }
}
