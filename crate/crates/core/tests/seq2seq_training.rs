//! Training behavior of the translator on small budgets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use signbot::seq2seq::{train, Seq2SeqModel, TrainingConfig};
use signbot::ParallelCorpus;

fn small(lr: f64, epochs: usize) -> TrainingConfig {
    TrainingConfig {
        learning_rate: lr,
        epochs,
        n_hidden: 24,
        val_fraction: 0.0,
        ..TrainingConfig::default()
    }
}

#[test]
fn single_pair_is_memorized() {
    let corpus = ParallelCorpus::parse("¿Cómo te llamas?\tTú Nombre Cuál\n").unwrap();
    let (model, history) = train(&corpus, &small(0.01, 60)).unwrap();
    assert_eq!(model.translate("¿Cómo te llamas?").unwrap(), ["Tú", "Nombre", "Cuál"]);
    assert!(history.train.last().unwrap() < &0.05, "{:?}", history.train.last());
}

#[test]
fn fresh_model_loss_is_near_uniform() {
    let corpus = ParallelCorpus::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let model = Seq2SeqModel::new(&corpus, &TrainingConfig::default(), &mut rng);
    let loss = model.mean_loss(&corpus).unwrap();
    let uniform = (model.target_vocab.len() as f64).ln();
    assert!((loss - uniform).abs() / uniform < 0.2, "{loss} vs ln V = {uniform}");
}

#[test]
fn untrained_model_scores_near_chance() {
    let corpus = ParallelCorpus::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let model = Seq2SeqModel::new(&corpus, &small(0.01, 1), &mut rng);
    let m = model.evaluate(&corpus).unwrap();
    assert!(m.exact_match_rate < 0.1, "{m:?}");
    assert!(m.token_accuracy < 0.2, "{m:?}");
}

#[test]
fn training_improves_corpus_metrics() {
    let corpus = ParallelCorpus::builtin();
    let (model, history) = train(&corpus, &small(3e-3, 40)).unwrap();
    assert!(history.train.iter().all(|l| l.is_finite()));
    assert!(history.train[39] < history.train[0]);
    let m = model.evaluate(&corpus).unwrap();
    assert!(m.token_accuracy > 0.5, "{m:?}");
}

#[test]
fn reversed_source_and_tanh_output_also_train() {
    let corpus = ParallelCorpus::builtin();
    let config = TrainingConfig {
        reverse_source: true,
        output_activation: signbot::rnn::OutputActivation::Tanh,
        val_fraction: 0.2,
        ..small(3e-3, 15)
    };
    let (_, history) = train(&corpus, &config).unwrap();
    assert!(history.val.iter().all(|v| v.is_some_and(f64::is_finite)));
    assert!(history.train[14] < history.train[0]);
}

#[test]
fn checkpoint_reload_translates_identically() {
    let corpus = ParallelCorpus::builtin();
    let (model, _) = train(&corpus, &small(3e-3, 10)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    model.save(&path).unwrap();
    let back = Seq2SeqModel::load(&path).unwrap();
    for pair in corpus.iter() {
        assert_eq!(
            model.translate(pair.source()).unwrap(),
            back.translate(pair.source()).unwrap()
        );
    }
    assert_eq!(
        model.translate("palabra desconocida").unwrap(),
        back.translate("palabra desconocida").unwrap()
    );
}

#[test]
fn split_is_seeded_and_disjoint() {
    let corpus = ParallelCorpus::builtin();
    let (t1, v1) = corpus.split_train_val(0.2, 7).unwrap();
    let (t2, v2) = corpus.split_train_val(0.2, 7).unwrap();
    assert_eq!((&t1, &v1), (&t2, &v2));
    assert_eq!(v1.len(), 8);
    assert_eq!(t1.len() + v1.len(), corpus.len());
    assert!(v1.iter().all(|p| !t1.pairs().contains(p)));
    let (_, v3) = corpus.split_train_val(0.2, 8).unwrap();
    assert_ne!(v1, v3);
}
