//! The classical attention baseline and the embedding-average baseline,
//! trained through the same harness as the quantum model.

use qsann::baselines::{CsannConfig, CsannParams, NaiveParams, CSANN_DIM};
use qsann::data::{build_splits, synthetic::separable_corpus};
use qsann::model::{QsannConfig, QsannModel, Regularization};
use qsann::train::{train, Classifier, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn report<C: Classifier>(
    name: &str,
    params: usize,
    dataset: &qsann::data::Dataset,
    model: C,
) -> qsann::Result<()> {
    let outcome = train(dataset, model, &TrainConfig::new(0.008, 20).with_seed(1))?;
    let last = outcome.log.last().expect("initial epoch is logged");
    println!(
        "{name:>6}: {params:>4} parameters, train {:.3}, test {:.3}, loss {:.5}",
        last.train_acc, last.test_acc, last.train_loss
    );
    Ok(())
}

fn main() -> qsann::Result<()> {
    let dataset = build_splits(&separable_corpus(100, 3), &[0.7, 0.3], 3)?;
    let vocab = dataset.vocabulary.len();
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let qsann = QsannModel::init(QsannConfig::new(2, 1, 1, 1), vocab, &mut rng)?;
    report("qsann", qsann.parameter_count().total, &dataset, qsann)?;

    let csann = CsannParams::init(CsannConfig::default(), vocab, &mut rng)?;
    report("csann", csann.parameter_count(), &dataset, csann)?;

    let naive = NaiveParams::init(CSANN_DIM, vocab, Regularization::default(), &mut rng)?;
    report("naive", naive.parameter_count(), &dataset, naive)?;
    Ok(())
}
