use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qiren::circuit::Entangler;
use qiren::models::Family;

mod commands;
mod config;

use config::RunConfig;

#[derive(Parser)]
#[command(name = "qiren", version, about = "Quantum implicit neural representations on a statevector simulator")]
struct Cli {
    /// Cap on worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a signal, once per seed, and keep the best run
    Train(TrainArgs),
    /// Evaluate a trained 2-D model on a denser pixel grid
    Superres(SuperresArgs),
    /// Frequency spectra of a trained 1-D model and its target
    Spectrum(SpectrumArgs),
    /// Train a matrix of circuit variants
    Ablate(AblateArgs),
    /// Run the built-in oracle checks
    Verify(VerifyArgs),
}

/// Settings shared by the training subcommands. Anything left unset falls
/// back to `--config`, then to the built-in defaults.
#[derive(Args, Clone, Debug)]
pub struct RunArgs {
    /// Model family: qiren, relu, tanh, relu_rff, siren, pure_quantum
    #[arg(long)]
    family: Option<Family>,
    /// Dataset: a .wav, .csv or .pgm file, or synthetic:two-tone / synthetic:smooth-image
    #[arg(long)]
    data: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Number of seeds, counting up from --seed
    #[arg(long)]
    seeds: Option<u64>,
    /// First seed (default: $QIREN_SEED, else 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Classical learning rate (quantum layers use 10× unless --lr-quantum)
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    lr_quantum: Option<f64>,
    /// Hidden width
    #[arg(long)]
    hidden: Option<usize>,
    /// Number of hidden (hybrid) layers
    #[arg(long)]
    depth: Option<usize>,
    /// Qubits per circuit
    #[arg(long)]
    qubits: Option<usize>,
    /// Re-upload count L
    #[arg(long)]
    reuploads: Option<usize>,
    /// Rot+entangler blocks per parameter layer K
    #[arg(long)]
    blocks: Option<usize>,
    /// cnot or cz
    #[arg(long)]
    entangler: Option<Entangler>,
    /// Upper bound of the pre-measurement RX noise angle
    #[arg(long)]
    noise: Option<f64>,
    /// Disable batch normalization
    #[arg(long)]
    no_batchnorm: bool,
    /// Output directory (default: out)
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON run configuration; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    /// Flags over config file over defaults.
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let file = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let first = self
            .seed
            .or_else(|| file.seeds.as_ref().and_then(|s| s.first().copied()))
            .or_else(config::env_seed)
            .unwrap_or(0);
        let seeds = match (self.seeds, self.seed) {
            (Some(n), _) => Some((first..first + n.max(1)).collect()),
            (None, Some(s)) => Some(vec![s]),
            (None, None) => None,
        };
        let flags = RunConfig {
            family: self.family,
            data: self.data.clone(),
            epochs: self.epochs,
            seeds,
            out: self.out.clone(),
            lr: self.lr,
            lr_quantum: self.lr_quantum,
            hidden_dim: self.hidden,
            depth: self.depth,
            qubits: self.qubits,
            reuploads: self.reuploads,
            blocks: self.blocks,
            entangler: self.entangler,
            noise: self.noise,
            batchnorm: self.no_batchnorm.then_some(false),
        };
        Ok(file.overlay(flags))
    }
}

#[derive(Args)]
pub struct TrainArgs {
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
pub struct SuperresArgs {
    /// Trained 2-D model
    #[arg(long)]
    checkpoint: PathBuf,
    /// Upsampling factor
    #[arg(long, default_value_t = 2)]
    factor: usize,
    /// Side of the training grid
    #[arg(long, default_value_t = qiren::tasks::IMAGE_SIZE)]
    size: usize,
    /// Low-resolution image; when given, nearest and bilinear baselines are written too
    #[arg(long)]
    data: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
pub struct SpectrumArgs {
    /// Trained 1-D model
    #[arg(long)]
    checkpoint: PathBuf,
    /// Target signal the model was trained on
    #[arg(long)]
    data: String,
    /// Band split, as a fraction of Nyquist
    #[arg(long, default_value_t = qiren::spectrum::DEFAULT_CUTOFF)]
    cutoff: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
pub struct AblateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Full Cartesian grid instead of one factor at a time
    #[arg(long)]
    grid: bool,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Random cases per sampled check
    #[arg(long, default_value_t = 20)]
    seeds: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let result = match &cli.command {
        Command::Train(a) => commands::train(a),
        Command::Superres(a) => commands::superres(a),
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Ablate(a) => commands::ablate(a),
        Command::Verify(a) => commands::verify(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let diverged = e
                .chain()
                .any(|c| matches!(c.downcast_ref::<qiren::Error>(), Some(qiren::Error::Diverged { .. })));
            ExitCode::from(if diverged { 2 } else { 1 })
        }
    }
}
