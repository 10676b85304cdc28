//! Trains the quantum model on a generated two-topic corpus with the
//! smallest preset and prints the per-epoch log.

use qsann::cli::RunConfig;
use qsann::data::{build_splits, synthetic::separable_corpus};
use qsann::model::QsannModel;
use qsann::train::{evaluate, train, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qsann::Result<()> {
    let corpus = separable_corpus(100, 7);
    println!("example sentences: {:?}", &corpus[..4]);
    let dataset = build_splits(&corpus, &[0.7, 0.3], 7)?;
    println!(
        "train {} / test {}, vocabulary {}",
        dataset.train.len(),
        dataset.test.len(),
        dataset.vocabulary.len()
    );

    let preset = RunConfig::preset("mc")?;
    let config = preset.qsann_config();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let model = QsannModel::init(config, dataset.vocabulary.len(), &mut rng)?;
    println!(
        "trainable parameters (excluding embeddings): {}",
        model.parameter_count().total
    );

    let train_config = TrainConfig::new(preset.train.learning_rate, 30).with_seed(0);
    let outcome = train(&dataset, model, &train_config)?;
    for m in outcome.log.iter().step_by(5) {
        println!(
            "epoch {:>3}  loss {:.6}  train {:.3}  test {:.3}",
            m.epoch, m.train_loss, m.train_acc, m.test_acc
        );
    }
    println!("stopped: {:?}", outcome.stop);

    let sample = &dataset.test[0];
    let prediction = outcome.model.forward(sample.tokens())?;
    println!(
        "'{}' -> y_hat {:.4}, label {} (true {})",
        sample.text(),
        prediction.y_hat,
        prediction.label,
        sample.label()
    );
    println!(
        "test accuracy: {:.3}",
        evaluate(&dataset.test, &outcome.model)?.accuracy
    );
    Ok(())
}
