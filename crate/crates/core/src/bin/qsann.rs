use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsann::cli::{self, ModelKind, Overrides, RunConfig, SampleSource, Split};
use qsann::sim::{NoiseKind, NoiseSpec};
use qsann::Result;

/// Train, evaluate and inspect quantum self-attention text classifiers.
#[derive(Parser)]
#[command(name = "qsann", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model per seed and write checkpoints, metrics and a summary.
    Train(RunArgs),
    /// Report accuracy and loss of a checkpoint.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Dataset manifest (.json) from a training run, or a raw TSV file.
        #[arg(long)]
        data: PathBuf,
        /// Split rebuilt from a manifest.
        #[arg(long, default_value = "test")]
        split: Split,
        /// Also write the report here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Export attention coefficients of selected samples as CSV.
    Attention {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "test")]
        split: Split,
        /// Zero-based sample indices.
        #[arg(long, value_delimiter = ',', required = true)]
        indices: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        layer: usize,
        #[arg(long)]
        output_dir: PathBuf,
    },
    /// Repeat the seed experiment under each noise channel and level.
    NoiseSweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.1,0.2")]
        levels: Vec<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "depolarizing,amplitude_damping"
        )]
        channels: Vec<NoiseKind>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run config.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in hyperparameter preset: mc, rp, yelp, imdb or amazon.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long, requires = "noise_p")]
    noise_kind: Option<NoiseKind>,
    #[arg(long, requires = "noise_kind")]
    noise_p: Option<f64>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut config = match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(name)) => RunConfig::preset(name)?,
            (None, None) => unreachable!("clap requires one of them"),
        };
        let noise = match (self.noise_kind, self.noise_p) {
            (Some(k), Some(p)) => Some(NoiseSpec::new(k, p)?),
            _ => None,
        };
        config.apply(&Overrides {
            model: self.model,
            dataset: self.dataset.clone(),
            output_dir: self.output_dir.clone(),
            seeds: self.seeds.clone(),
            epochs: self.epochs,
            learning_rate: self.lr,
            batch_size: self.batch_size,
            noise,
        });
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => cli::print_json(&cli::cmd_train(&args.resolve()?)?),
        Command::Eval {
            checkpoint,
            data,
            split,
            output,
        } => cli::print_json(&cli::cmd_eval(
            &checkpoint,
            &SampleSource::infer(&data, split),
            output.as_deref(),
        )?),
        Command::Attention {
            checkpoint,
            data,
            split,
            indices,
            layer,
            output_dir,
        } => cli::print_json(&cli::cmd_attention(
            &checkpoint,
            &SampleSource::infer(&data, split),
            &indices,
            layer,
            &output_dir,
        )?),
        Command::NoiseSweep {
            run,
            levels,
            channels,
        } => cli::print_json(&cli::cmd_noise_sweep(&run.resolve()?, &channels, &levels)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
