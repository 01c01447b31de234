//! Translates sentences with a saved checkpoint, or with a model trained on
//! the spot when no checkpoint is given.
//!
//! ```sh
//! cargo run --release --example translate -- model.ckpt "¿Qué tal?" "Te quiero"
//! ```

use signbot::seq2seq::{train, Seq2SeqModel, TrainingConfig};
use signbot::ParallelCorpus;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args: Vec<String> = std::env::args().skip(1).collect();
    let model = match args.first().filter(|a| a.ends_with(".ckpt")) {
        Some(path) => {
            let model = Seq2SeqModel::load(std::path::Path::new(path))?;
            args.remove(0);
            model
        }
        None => {
            eprintln!("no checkpoint given, training a small model first");
            let config = TrainingConfig {
                learning_rate: 3e-3,
                epochs: 60,
                n_hidden: 64,
                val_fraction: 0.0,
                ..TrainingConfig::default()
            };
            train(&ParallelCorpus::builtin(), &config)?.0
        }
    };
    if args.is_empty() {
        args = vec![
            "¿Cómo te llamas?".into(),
            "¿Cuántos años tienes?".into(),
            "Te quiero".into(),
        ];
    }
    for sentence in &args {
        println!("{sentence} -> {}", model.translate(sentence)?.join(" "));
    }
    Ok(())
}
