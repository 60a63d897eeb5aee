use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use idtqc_cli::{run, CliError, ExperimentConfig, ExperimentKind, RunOptions, RunOutput};

#[derive(Parser)]
#[command(name = "idtqc", version, about = "IDT-QC coding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a QC-LDPC code and write its description.
    Codegen(Common),
    /// BER sweep over an integer-tap ISI channel.
    IsiBer(Common),
    /// BER sweep of frame-asynchronous compute-and-forward.
    CfFrameBer(Common),
    /// BER sweep of symbol-asynchronous joint detection and decoding.
    CfSymbolBer(Common),
    /// Average computation rate versus D_max.
    Rates(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Paper-scale code and frame budget.
    #[arg(long)]
    long_run: bool,
}

fn execute(kind: ExperimentKind, c: Common) -> Result<RunOutput, CliError> {
    let (config, base_dir) = match &c.config {
        Some(path) => (
            ExperimentConfig::load(path)?,
            path.parent().map(PathBuf::from).unwrap_or_default(),
        ),
        None => (ExperimentConfig::default(), PathBuf::new()),
    };
    let opts = RunOptions {
        seed: c.seed,
        out: c.out,
        workers: c.workers,
        long_run: c.long_run,
        base_dir,
    };
    run(kind, config, &opts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Command::Codegen(c) => (ExperimentKind::Codegen, c),
        Command::IsiBer(c) => (ExperimentKind::IsiBer, c),
        Command::CfFrameBer(c) => (ExperimentKind::CfFrameBer, c),
        Command::CfSymbolBer(c) => (ExperimentKind::CfSymbolBer, c),
        Command::Rates(c) => (ExperimentKind::Rates, c),
    };
    match execute(kind, common) {
        Ok(RunOutput::Ber(points)) => {
            for p in points {
                println!("snr_db={} frames={} ber={:.3e} fer={:.3e}", p.snr_db, p.frames, p.ber, p.fer);
            }
            ExitCode::SUCCESS
        }
        Ok(RunOutput::Rates(points)) => {
            for p in points {
                println!("d_max={} mean_rate={:.5}", p.d_max, p.mean_rate);
            }
            ExitCode::SUCCESS
        }
        Ok(RunOutput::Code(code)) => {
            println!("n={} k={} b={} L={}", code.n(), code.k(), code.b(), code.circulant());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("idtqc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
