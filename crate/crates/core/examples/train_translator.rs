//! Trains the translator on the shipped corpus and prints the loss curve and
//! a few translations.
//!
//! ```sh
//! cargo run --release --example train_translator -- 0.0001 100
//! ```

use std::time::Instant;

use signbot::seq2seq::{train, TrainingConfig};
use signbot::ParallelCorpus;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let learning_rate = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1e-4);
    let epochs = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);
    let val_fraction = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.2);

    let corpus = ParallelCorpus::builtin();
    let config = TrainingConfig {
        learning_rate,
        epochs,
        seed,
        val_fraction,
        ..TrainingConfig::default()
    };
    let start = Instant::now();
    let (model, history) = train(&corpus, &config)?;
    println!("trained {epochs} epochs in {:.1?}", start.elapsed());
    print!("{}", history.to_csv());

    for pair in corpus.iter().take(10) {
        println!("{:<50} -> {}", pair.source(), model.translate(pair.source())?.join(" "));
    }
    let m = model.evaluate(&corpus)?;
    println!(
        "exact match {:.3}, token accuracy {:.3}",
        m.exact_match_rate, m.token_accuracy
    );
    Ok(())
}
