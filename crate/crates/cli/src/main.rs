use apnn_cli::commands::{apply_overrides, cmd_evaluate, cmd_generate, cmd_train};
use apnn_cli::config::resolve;
use apnn_cli::CliResult;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "apnn", about = "Kinetic-equation experiments: generate, train, evaluate")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Name of a shipped experiment preset.
    #[arg(long)]
    preset: Option<String>,
    /// Path to a TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the preset's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: runs/<preset name>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the epoch cap.
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the reference problem and store it as a dataset.
    Generate(RunArgs),
    /// Fit the network against the stored dataset.
    Train(RunArgs),
    /// Score a trained checkpoint and export plot-ready grids.
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
        /// Fixed times to export as per-field slice files (repeatable).
        #[arg(long = "slice")]
        slices: Vec<f64>,
    },
}

fn run() -> CliResult<()> {
    let cli = Cli::parse();
    let (args, slices) = match &cli.cmd {
        Cmd::Generate(a) | Cmd::Train(a) => (a, Vec::new()),
        Cmd::Evaluate { run, slices } => (run, slices.clone()),
    };
    let mut cfg = resolve(args.preset.as_deref(), args.config.as_deref())?;
    let out = apply_overrides(&mut cfg, args.seed, args.out.as_deref(), args.epochs);
    match &cli.cmd {
        Cmd::Generate(_) => cmd_generate(&cfg, &out),
        Cmd::Train(_) => cmd_train(&cfg, &out),
        Cmd::Evaluate { .. } => cmd_evaluate(&cfg, &out, &slices),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
