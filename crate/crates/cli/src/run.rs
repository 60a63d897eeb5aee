//! Runs a resolved configuration and writes its outputs.

use std::path::{Path, PathBuf};

use idtqc::qc_ldpc::QcCode;
use idtqc::rates::{monte_carlo_rates, RatePoint};
use serde_json::json;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::sweep::{ber_sweep, BerPoint, CfFrameTrial, CfSymbolTrial, IsiTrial};
use crate::CliError;

pub const SNR_DEFINITION: &str = "snr_db = 10 log10(P): per-symbol transmit power over unit noise variance";

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the config's seed.
    pub seed: Option<u64>,
    /// Overrides the config's output path.
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub long_run: bool,
    /// Base directory for relative code files.
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug)]
pub enum RunOutput {
    Ber(Vec<BerPoint>),
    Rates(Vec<RatePoint>),
    Code(QcCode),
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_csv<T: serde::Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

/// Executes one experiment. BER sweeps write `snr_db,frames,bit_errors,
/// frame_errors,ber,fer,seed` rows, rate curves write
/// `d_max,n_realizations,mean_rate,seed`, and `codegen` writes a code
/// description. Every run also writes `<out>.manifest.json`.
pub fn run(kind: ExperimentKind, config: ExperimentConfig, opts: &RunOptions) -> Result<RunOutput, CliError> {
    let mut cfg = config.resolve(kind, opts.long_run)?;
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(o) = &opts.out {
        cfg.out = Some(o.clone());
    }
    let out = cfg.out.clone().unwrap_or_else(|| {
        PathBuf::from(match kind {
            ExperimentKind::Codegen => "code.json".to_string(),
            _ => format!("{}.csv", kind.name()),
        })
    });
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let code = cfg.code.as_ref().expect("resolved").build(&opts.base_dir)?;
    let grid = cfg.snr_db.clone().unwrap_or_default();

    let mut extra = json!({});
    let result = pool.install(|| -> Result<RunOutput, CliError> {
        Ok(match kind {
            ExperimentKind::IsiBer => {
                let t = IsiTrial::new(code, cfg.isi.clone().expect("resolved").taps, cfg.bp_iters)?;
                RunOutput::Ber(ber_sweep(&grid, cfg.stop, cfg.seed, t.bits_per_frame(), |s, r| t.run(s, r))?)
            }
            ExperimentKind::CfFrameBer => {
                let t = CfFrameTrial::new(code, cfg.frame_scene.clone().expect("resolved"), cfg.bp_iters)?;
                for snr in &grid {
                    t.check_invertible(snr.power_and_noise().0)?;
                }
                RunOutput::Ber(ber_sweep(&grid, cfg.stop, cfg.seed, t.bits_per_frame(), |s, r| t.run(s, r))?)
            }
            ExperimentKind::CfSymbolBer => {
                let spec = cfg.symbol_scene.clone().expect("resolved");
                let t = CfSymbolTrial::new(code, spec, cfg.outer_iters, cfg.inner_iters)?;
                RunOutput::Ber(ber_sweep(&grid, cfg.stop, cfg.seed, t.bits_per_frame(), |s, r| t.run(s, r))?)
            }
            ExperimentKind::Rates => {
                let curve = cfg.rates.clone().expect("resolved");
                RunOutput::Rates(monte_carlo_rates(&curve, cfg.seed).map_err(|e| CliError::Config(format!("rates: {e}")))?)
            }
            ExperimentKind::Codegen => RunOutput::Code(code),
        })
    })?;

    match &result {
        RunOutput::Ber(points) => {
            write_csv(&out, points)?;
            extra = json!({
                "snr_definition": SNR_DEFINITION,
                "bits_per_frame": points.first().map_or(0, |p| p.bits_per_frame),
                "converged": points.iter().map(|p| p.converged).collect::<Vec<_>>(),
            });
        }
        RunOutput::Rates(points) => write_csv(&out, points)?,
        RunOutput::Code(code) => {
            let desc = serde_json::to_value(code.description()).map_err(|e| io_err(&out, e))?;
            write_json(&out, &desc)?;
            extra = json!({"n": code.n(), "k": code.k(), "b": code.b()});
        }
    }
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "kind": kind.name(),
        "seed": cfg.seed,
        "output": out,
        "config": cfg,
        "details": extra,
    });
    write_json(&manifest_path(&out), &manifest)?;
    Ok(result)
}
