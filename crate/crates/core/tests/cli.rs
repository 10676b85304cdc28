use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qsann::cli::{self, NoiseSweepSummary, RunConfig, SampleSource, Split, TrainSummary};
use qsann::data::{synthetic::separable_corpus, tokenize, write_tsv};
use qsann::sim::NoiseKind;
use qsann::QsannError;
use tempfile::TempDir;

fn qsann(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsann"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn toy_data(dir: &Path) -> PathBuf {
    let path = dir.join("toy.tsv");
    write_tsv(&separable_corpus(60, 2), &path).unwrap();
    path
}

fn toy_config(dir: &Path, seeds: &[u64], epochs: usize) -> RunConfig {
    let mut cfg = RunConfig::preset("mc").unwrap();
    cfg.dataset.path = toy_data(dir);
    cfg.dataset.counts = None;
    cfg.dataset.ratios = Some(vec![0.7, 0.3]);
    cfg.seeds = seeds.to_vec();
    cfg.train.epochs = epochs;
    cfg.output_dir = Some(dir.join("run"));
    cfg
}

fn write_config(dir: &Path, cfg: &RunConfig) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, cfg.to_toml_string().unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn missing_dataset_exits_2_without_artifacts() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = qsann(&[
        "train",
        "--preset",
        "mc",
        "--dataset",
        s(&dir.path().join("nope.tsv")),
        "--output-dir",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(qsann(&["train"]).status.code(), Some(2));
    assert_eq!(
        qsann(&["train", "--preset", "nonesuch"]).status.code(),
        Some(2)
    );
}

#[test]
fn train_writes_artifacts_and_eval_reproduces_final_accuracy() {
    let dir = TempDir::new().unwrap();
    let cfg = toy_config(dir.path(), &[0, 1, 2], 4);
    let o = qsann(&["train", "--config", s(&write_config(dir.path(), &cfg))]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let run = dir.path().join("run");
    let summary: TrainSummary =
        serde_json::from_str(&fs::read_to_string(run.join(cli::SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(summary.parameter_count, 25);
    assert_eq!(summary.seeds.len(), 3);
    let stdout: TrainSummary = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(stdout, summary);

    for seed in [0u64, 1, 2] {
        let seed_dir = cli::seed_dir(&run, seed);
        let log = fs::read_to_string(seed_dir.join(cli::METRICS_FILE)).unwrap();
        let last: serde_json::Value = serde_json::from_str(log.lines().last().unwrap()).unwrap();
        assert_eq!(last["schema_version"], 1);
        let report = qsann(&[
            "eval",
            "--checkpoint",
            s(&seed_dir.join(cli::CHECKPOINT_FILE)),
            "--data",
            s(&run.join(cli::MANIFEST_FILE)),
        ]);
        assert!(report.status.success());
        let report: serde_json::Value = serde_json::from_slice(&report.stdout).unwrap();
        assert_eq!(report["accuracy"].as_f64(), last["test_acc"].as_f64());
    }
}

#[test]
fn nine_seed_summary_has_mean_and_std() {
    let dir = TempDir::new().unwrap();
    let cfg = toy_config(dir.path(), &(0..9).collect::<Vec<_>>(), 1);
    let summary = cli::cmd_train(&cfg).unwrap();
    assert_eq!(summary.seeds.len(), 9);
    let accs: Vec<f64> = summary.seeds.iter().map(|r| r.test_acc).collect();
    let mean = accs.iter().sum::<f64>() / 9.0;
    let std = (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / 8.0).sqrt();
    assert!((summary.test_acc.mean - mean).abs() < 1e-15);
    assert!((summary.test_acc.std - std).abs() < 1e-15);
}

#[test]
fn rerunning_the_written_config_reproduces_artifacts() {
    let dir = TempDir::new().unwrap();
    let cfg = toy_config(dir.path(), &[3, 4], 3);
    cli::cmd_train(&cfg).unwrap();
    let run = dir.path().join("run");
    let mut again = RunConfig::load(&run.join(cli::CONFIG_FILE)).unwrap();
    again.output_dir = Some(dir.path().join("again"));
    cli::cmd_train(&again).unwrap();
    for name in [cli::SUMMARY_FILE, cli::MANIFEST_FILE] {
        assert_eq!(
            fs::read(run.join(name)).unwrap(),
            fs::read(dir.path().join("again").join(name)).unwrap()
        );
    }
    for seed in [3, 4] {
        for name in [cli::METRICS_FILE, cli::CHECKPOINT_FILE] {
            let a = fs::read(cli::seed_dir(&run, seed).join(name)).unwrap();
            let b = fs::read(cli::seed_dir(&dir.path().join("again"), seed).join(name)).unwrap();
            assert_eq!(a, b, "{name}");
        }
    }
}

#[test]
fn corrupt_checkpoint_exits_2() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"schema_version\": 1, \"model\":").unwrap();
    let data = toy_data(dir.path());
    let o = qsann(&["eval", "--checkpoint", s(&bad), "--data", s(&data)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("checkpoint"));
}

#[test]
fn empty_dataset_is_an_error() {
    let dir = TempDir::new().unwrap();
    let mut cfg = toy_config(dir.path(), &[0], 1);
    let empty = dir.path().join("empty.tsv");
    fs::write(&empty, "").unwrap();
    cfg.dataset.path = empty.clone();
    let err = cli::cmd_train(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 2);

    cli::cmd_train(&toy_config(dir.path(), &[0], 1)).unwrap();
    let ck = cli::seed_dir(&dir.path().join("run"), 0).join(cli::CHECKPOINT_FILE);
    assert!(cli::cmd_eval(&ck, &SampleSource::Tsv(empty), None).is_err());
}

#[test]
fn manifest_from_another_vocabulary_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = toy_config(dir.path(), &[0], 1);
    cli::cmd_train(&cfg).unwrap();
    let mut other = cfg.clone();
    other.dataset.split_seed = 99;
    other.output_dir = Some(dir.path().join("other"));
    cli::cmd_train(&other).unwrap();
    let ck = cli::seed_dir(&dir.path().join("run"), 0).join(cli::CHECKPOINT_FILE);
    let source = SampleSource::Manifest {
        path: dir.path().join("other").join(cli::MANIFEST_FILE),
        split: Split::Test,
    };
    let err = cli::cmd_eval(&ck, &source, None).unwrap_err();
    assert!(
        matches!(err, QsannError::VocabularyMismatch { .. }),
        "{err}"
    );
}

#[test]
fn attention_export_rows_average_to_one() {
    let dir = TempDir::new().unwrap();
    let cfg = toy_config(dir.path(), &[0], 2);
    cli::cmd_train(&cfg).unwrap();
    let ck = cli::seed_dir(&dir.path().join("run"), 0).join(cli::CHECKPOINT_FILE);
    let probe = dir.path().join("probe.tsv");
    fs::write(&probe, "Bread, soup... and CAKE!\t0\nrust\t1\n").unwrap();
    let out = dir.path().join("att");
    let o = qsann(&[
        "attention",
        "--checkpoint",
        s(&ck),
        "--data",
        s(&probe),
        "--indices",
        "0,1",
        "--output-dir",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let text = fs::read_to_string(out.join("attention_0_averaged.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header, tokenize("Bread, soup... and CAKE!"));
    let values: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(values.len(), 4);
    assert!((values.iter().sum::<f64>() - 1.0).abs() < 1e-9);

    let matrix = fs::read_to_string(out.join("attention_0_matrix.csv")).unwrap();
    let rows: Vec<&str> = matrix.lines().collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[0].starts_with("word,bread,"));
    for row in &rows[1..] {
        let sum: f64 = row
            .split(',')
            .skip(1)
            .map(|v| v.parse::<f64>().unwrap())
            .sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    let single = fs::read_to_string(out.join("attention_1_averaged.csv")).unwrap();
    assert_eq!(single, "rust\n1\n");

    let o = qsann(&[
        "attention",
        "--checkpoint",
        s(&ck),
        "--data",
        s(&probe),
        "--indices",
        "2",
        "--output-dir",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn noise_sweep_validates_levels_and_matches_noiseless_at_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = toy_config(dir.path(), &[0, 1], 2);
    let path = write_config(dir.path(), &cfg);
    let o = qsann(&["noise-sweep", "--config", s(&path), "--levels", "0.1,1.5"]);
    assert_eq!(o.status.code(), Some(2));

    let sweep: NoiseSweepSummary =
        cli::cmd_noise_sweep(&cfg, &NoiseKind::ALL, &[0.0, 0.1]).unwrap();
    assert_eq!(sweep.entries.len(), 5);
    let reference = &sweep.entries[0];
    assert!(reference.channel.is_none());
    for e in sweep.entries.iter().filter(|e| e.p == 0.0) {
        assert_eq!(e.test_acc, reference.test_acc);
        assert_eq!(e.train_acc, reference.train_acc);
    }
    let noiseless = cli::cmd_train(&cfg).unwrap();
    let accs: Vec<f64> = noiseless.seeds.iter().map(|r| r.test_acc).collect();
    assert_eq!(accs, reference.test_acc);
    assert!(dir.path().join("run").join("noise_sweep.json").is_file());
}

#[test]
fn noise_sweep_rejects_classical_models() {
    let dir = TempDir::new().unwrap();
    let mut cfg = toy_config(dir.path(), &[0], 1);
    cfg.model = qsann::cli::ModelKind::Csann;
    assert_eq!(
        cli::cmd_noise_sweep(&cfg, &NoiseKind::ALL, &[0.1])
            .unwrap_err()
            .exit_code(),
        2
    );
}

#[test]
fn diverging_run_exits_1_and_keeps_partial_artifacts() {
    let dir = TempDir::new().unwrap();
    let data = toy_data(dir.path());
    let out = dir.path().join("blowup");
    let o = qsann(&[
        "train",
        "--preset",
        "yelp",
        "--model",
        "naive",
        "--dataset",
        s(&data),
        "--output-dir",
        s(&out),
        "--seeds",
        "0",
        "--epochs",
        "3",
        "--lr",
        "1e300",
    ]);
    assert_eq!(
        o.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let seed_dir = cli::seed_dir(&out, 0);
    assert!(seed_dir.join(cli::CHECKPOINT_FILE).is_file());
    let log = fs::read_to_string(seed_dir.join(cli::METRICS_FILE)).unwrap();
    assert!(!log.is_empty());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join(cli::SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(summary["seeds"][0]["stop"]["reason"], "non_finite");
}

#[test]
fn classical_models_train_through_the_runner() {
    let dir = TempDir::new().unwrap();
    for (kind, count) in [
        (qsann::cli::ModelKind::Csann, 785),
        (qsann::cli::ModelKind::Naive, 17),
    ] {
        let mut cfg = toy_config(dir.path(), &[0], 2);
        cfg.model = kind;
        cfg.output_dir = Some(dir.path().join(kind.name()));
        let summary = cli::cmd_train(&cfg).unwrap();
        assert_eq!(summary.parameter_count, count);
        let ck = cli::seed_dir(&dir.path().join(kind.name()), 0).join(cli::CHECKPOINT_FILE);
        let source = SampleSource::Manifest {
            path: dir.path().join(kind.name()).join(cli::MANIFEST_FILE),
            split: Split::Test,
        };
        assert_eq!(
            cli::cmd_eval(&ck, &source, None).unwrap().accuracy,
            summary.seeds[0].test_acc
        );
    }
}
