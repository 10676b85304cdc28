//! Drives the experiment runner as a library: trains three seeds from a
//! preset, re-evaluates a checkpoint, exports attention CSVs and runs a
//! small noise sweep. Outputs go to a directory given as the first argument
//! (default: a fresh temporary directory).

use std::path::PathBuf;

use qsann::cli::{self, Overrides, RunConfig, SampleSource, Split};
use qsann::data::{synthetic::separable_corpus, write_tsv};
use qsann::sim::NoiseKind;

fn main() -> qsann::Result<()> {
    let root = std::env::args().nth(1).map_or_else(
        || std::env::temp_dir().join(format!("qsann-demo-{}", std::process::id())),
        PathBuf::from,
    );
    std::fs::create_dir_all(&root).expect("output directory");
    let data = root.join("toy.tsv");
    write_tsv(&separable_corpus(100, 5), &data)?;

    let mut config = RunConfig::preset("mc")?;
    config.dataset.counts = None;
    config.dataset.ratios = Some(vec![0.7, 0.3]);
    config.apply(&Overrides {
        dataset: Some(data),
        output_dir: Some(root.join("train")),
        seeds: Some(vec![0, 1, 2]),
        epochs: Some(15),
        ..Overrides::default()
    });
    let summary = cli::cmd_train(&config)?;
    println!(
        "{} parameters; test accuracy {:.3} +- {:.3}",
        summary.parameter_count, summary.test_acc.mean, summary.test_acc.std
    );

    let checkpoint = cli::seed_dir(&root.join("train"), 0).join(cli::CHECKPOINT_FILE);
    let source = SampleSource::Manifest {
        path: root.join("train").join(cli::MANIFEST_FILE),
        split: Split::Test,
    };
    let eval = cli::cmd_eval(&checkpoint, &source, None)?;
    println!(
        "re-evaluated seed 0: accuracy {:.3} on {} samples",
        eval.accuracy, eval.samples
    );

    let index = cli::cmd_attention(&checkpoint, &source, &[0, 1], 0, &root.join("attention"))?;
    for e in &index.exports {
        println!("'{}': {:?}", e.text, e.averaged);
    }

    config.output_dir = Some(root.join("noise"));
    let sweep = cli::cmd_noise_sweep(&config, &NoiseKind::ALL, &[0.1])?;
    for e in &sweep.entries {
        println!(
            "{:?} p={}: mean test accuracy {:.3}",
            e.channel, e.p, e.test_stats.mean
        );
    }
    println!("artifacts in {}", root.display());
    Ok(())
}
