//! Seeded Monte-Carlo BER sweeps.

use idtqc::channels::{cf_frame_apply, isi_apply, oversample, CfScene, IsiChannel, SceneModel};
use idtqc::idt::{transmit, IdtConfig, PamMap};
use idtqc::qc_ldpc::QcCode;
use idtqc::rates::{best_coeffs, derive_seed};
use idtqc::receivers::{
    central_estimate, coefficient_matrix, isi_receive, jcf_decode, relay_receive_frame, DecodedFunction,
    MessageDecode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{FrameSceneSpec, Snr, StopRule, SymbolSceneSpec};
use crate::CliError;

/// Trials evaluated together before the in-order stopping check. Fixed so
/// that results do not depend on the worker count.
pub const BATCH: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    pub bit_errors: u64,
    pub frame_error: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BerPoint {
    pub snr_db: String,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub seed: u64,
    /// Bits compared per frame.
    #[serde(skip)]
    pub bits_per_frame: u64,
    /// Stopped on the frame-error target rather than the frame cap.
    #[serde(skip)]
    pub converged: bool,
}

/// Runs each grid point until `min_frame_errors` frame errors (when
/// positive) or `max_frames` frames. Trial `t` of point `i` draws from
/// `derive_seed(seed, i, t)`.
pub fn ber_sweep<F>(grid: &[Snr], stop: StopRule, seed: u64, bits_per_frame: u64, trial: F) -> Result<Vec<BerPoint>, CliError>
where
    F: Fn(Snr, &mut ChaCha8Rng) -> Result<TrialOutcome, CliError> + Sync,
{
    let mut points = Vec::with_capacity(grid.len());
    for (i, &snr) in grid.iter().enumerate() {
        let (mut frames, mut bit_errors, mut frame_errors) = (0u64, 0u64, 0u64);
        let target_met = |fe: u64| stop.min_frame_errors > 0 && fe >= stop.min_frame_errors;
        'point: while frames < stop.max_frames && !target_met(frame_errors) {
            let batch = BATCH.min(stop.max_frames - frames);
            let outcomes: Vec<Result<TrialOutcome, CliError>> = (frames..frames + batch)
                .into_par_iter()
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64, t));
                    trial(snr, &mut rng)
                })
                .collect();
            for o in outcomes {
                let o = o?;
                frames += 1;
                bit_errors += o.bit_errors;
                frame_errors += o.frame_error as u64;
                if target_met(frame_errors) {
                    break 'point;
                }
            }
        }
        let ber = if frames == 0 {
            0.0
        } else {
            bit_errors as f64 / (frames * bits_per_frame) as f64
        };
        let fer = if frames == 0 {
            0.0
        } else {
            frame_errors as f64 / frames as f64
        };
        points.push(BerPoint {
            snr_db: snr.to_string(),
            frames,
            bit_errors,
            frame_errors,
            ber,
            fer,
            seed,
            bits_per_frame,
            converged: target_met(frame_errors),
        });
    }
    Ok(points)
}

fn runtime(e: idtqc::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn random_info<R: Rng>(cfg: &IdtConfig, p: u32, rng: &mut R) -> Vec<u32> {
    (0..cfg.info_len()).map(|_| rng.gen_range(0..p)).collect()
}

fn symbol_errors(a: &[u32], b: &[u32]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

/// Integer-tap ISI link: one source, combined-codeword decoding and
/// deconvolution.
pub struct IsiTrial {
    pub code: QcCode,
    pub cfg: IdtConfig,
    pub taps: Vec<i64>,
    pub bp_iters: usize,
}

impl IsiTrial {
    pub fn new(code: QcCode, taps: Vec<i64>, bp_iters: usize) -> Result<Self, CliError> {
        let d_max = taps.len().saturating_sub(1);
        let cfg = IdtConfig::new(code.b(), code.circulant(), d_max, 1, code.message_blocks())
            .map_err(|e| CliError::Config(format!("isi: {e}")))?;
        IsiChannel::new(taps.clone(), 1.0).map_err(|e| CliError::Config(format!("isi.taps: {e}")))?;
        Ok(IsiTrial {
            code,
            cfg,
            taps,
            bp_iters,
        })
    }

    pub fn bits_per_frame(&self) -> u64 {
        self.cfg.info_len() as u64
    }

    pub fn run(&self, snr: Snr, rng: &mut ChaCha8Rng) -> Result<TrialOutcome, CliError> {
        let (power, noise) = snr.power_and_noise();
        let pam = PamMap::new(self.code.field(), power).map_err(runtime)?;
        let ch = IsiChannel::new(self.taps.clone(), noise).map_err(runtime)?;
        let info = random_info(&self.cfg, self.code.field().p(), rng);
        let (_, x) = transmit(&self.code, &self.cfg, &pam, &info).map_err(runtime)?;
        let y = isi_apply(&x, &ch, rng);
        let out = isi_receive(&y, &ch, &self.code, &self.cfg, &pam, self.bp_iters).map_err(runtime)?;
        let bit_errors = symbol_errors(out.estimate(), &info);
        Ok(TrialOutcome {
            bit_errors,
            frame_error: !out.is_recovered() || bit_errors > 0,
        })
    }
}

/// Frame-asynchronous compute-and-forward with central recovery of every
/// source.
pub struct CfFrameTrial {
    pub code: QcCode,
    pub cfg: IdtConfig,
    pub spec: FrameSceneSpec,
    pub bp_iters: usize,
}

impl CfFrameTrial {
    pub fn new(code: QcCode, spec: FrameSceneSpec, bp_iters: usize) -> Result<Self, CliError> {
        let s = spec.h[0].len();
        let cfg = IdtConfig::new(code.b(), code.circulant(), spec.d_max, s, code.message_blocks())
            .map_err(|e| CliError::Config(format!("frame_scene: {e}")))?;
        Ok(CfFrameTrial {
            code,
            cfg,
            spec,
            bp_iters,
        })
    }

    pub fn bits_per_frame(&self) -> u64 {
        (self.cfg.sources * self.cfg.info_len()) as u64
    }

    fn scene(&self, power: f64, noise: f64) -> CfScene {
        CfScene {
            sources: self.cfg.sources,
            relays: self.spec.h.len(),
            power,
            h: self.spec.h.clone(),
            tau: self.spec.tau.iter().map(|r| r.iter().map(|&t| t as f64).collect()).collect(),
            d_max: self.spec.d_max,
            model: SceneModel::Frame,
            noise_std: noise,
        }
    }

    /// Relay coefficients: the configured ones, or each relay's best.
    pub fn coefficients(&self, power: f64) -> Result<Vec<Vec<i64>>, CliError> {
        match &self.spec.coeffs {
            Some(c) => Ok(c.clone()),
            None => self
                .spec
                .h
                .iter()
                .map(|h| best_coeffs(h, power, None).map(|(a, _)| a).map_err(runtime))
                .collect(),
        }
    }

    /// Fails when the coefficient and delay set cannot be inverted.
    pub fn check_invertible(&self, power: f64) -> Result<(), CliError> {
        let scene = self.scene(power, 1.0);
        let field = self.code.field();
        let funcs: Vec<DecodedFunction> = self
            .coefficients(power)?
            .iter()
            .enumerate()
            .map(|(m, a)| {
                let d = scene.int_delays(m);
                let min = d.iter().copied().min().unwrap_or(0);
                DecodedFunction {
                    relay: m,
                    coeffs: a.iter().map(|&x| field.reduce(x)).collect(),
                    delays: d.iter().map(|x| x - min).collect(),
                    word: Vec::new(),
                }
            })
            .collect();
        let det = coefficient_matrix(&funcs, field, self.cfg.l)
            .and_then(|b| b.det(self.cfg.l))
            .map_err(runtime)?;
        if det.is_zero() {
            return Err(CliError::Runtime(
                "the relays' coefficient matrix is singular over F_p[D]".into(),
            ));
        }
        Ok(())
    }

    pub fn run(&self, snr: Snr, rng: &mut ChaCha8Rng) -> Result<TrialOutcome, CliError> {
        let (power, noise) = snr.power_and_noise();
        let scene = self.scene(power, noise);
        let pam = PamMap::new(self.code.field(), power).map_err(runtime)?;
        let coeffs = self.coefficients(power)?;
        let p = self.code.field().p();
        let infos: Vec<Vec<u32>> = (0..self.cfg.sources).map(|_| random_info(&self.cfg, p, rng)).collect();
        let frames = infos
            .iter()
            .map(|w| transmit(&self.code, &self.cfg, &pam, w).map(|t| t.1))
            .collect::<idtqc::Result<Vec<_>>>()
            .map_err(runtime)?;
        let mut funcs = Vec::with_capacity(scene.relays);
        let mut all_decoded = true;
        for (m, a) in coeffs.iter().enumerate() {
            let y = cf_frame_apply(&frames, &scene, m, rng).map_err(runtime)?;
            let out = relay_receive_frame(&y, &scene, m, a, &self.code, &self.cfg, &pam, self.bp_iters)
                .map_err(runtime)?;
            all_decoded &= out.is_decoded();
            funcs.push(out.estimate().clone());
        }
        let est = central_estimate(&funcs, &self.code, &self.cfg).map_err(runtime)?;
        let bit_errors: u64 = est.iter().zip(&infos).map(|(e, w)| symbol_errors(e.estimate(), w)).sum();
        Ok(TrialOutcome {
            bit_errors,
            frame_error: !all_decoded || !est.iter().all(MessageDecode::is_recovered) || bit_errors > 0,
        })
    }
}

/// Symbol-asynchronous two-source relay with joint zigzag detection and
/// pair decoding. Errors are counted on the systematic part of the decoded
/// function.
pub struct CfSymbolTrial {
    pub code: QcCode,
    pub cfg: IdtConfig,
    pub spec: SymbolSceneSpec,
    pub outer_iters: usize,
    pub inner_iters: usize,
}

impl CfSymbolTrial {
    pub fn new(code: QcCode, spec: SymbolSceneSpec, outer_iters: usize, inner_iters: usize) -> Result<Self, CliError> {
        if code.field().p() != 2 {
            return Err(CliError::Config("at `code`: symbol-asynchronous runs need a binary code".into()));
        }
        let cfg = IdtConfig::new(code.b(), code.circulant(), spec.d_max, 2, code.message_blocks())
            .map_err(|e| CliError::Config(format!("symbol_scene: {e}")))?;
        Ok(CfSymbolTrial {
            code,
            cfg,
            spec,
            outer_iters,
            inner_iters,
        })
    }

    pub fn bits_per_frame(&self) -> u64 {
        self.code.k() as u64
    }

    pub fn run(&self, snr: Snr, rng: &mut ChaCha8Rng) -> Result<TrialOutcome, CliError> {
        let (power, noise) = snr.power_and_noise();
        let pam = PamMap::new(self.code.field(), power).map_err(runtime)?;
        let tau_f = self.spec.tau.floor() as usize;
        let tau_s = self.spec.tau - tau_f as f64;
        let i1 = random_info(&self.cfg, 2, rng);
        let i2 = random_info(&self.cfg, 2, rng);
        let (c1, x1) = transmit(&self.code, &self.cfg, &pam, &i1).map_err(runtime)?;
        let (c2, x2) = transmit(&self.code, &self.cfg, &pam, &i2).map_err(runtime)?;
        let rx = oversample(&x1, &x2, self.spec.h, tau_f, tau_s, noise, rng).map_err(runtime)?;
        let out = jcf_decode(&rx, &self.code, &self.cfg, &pam, self.outer_iters, self.inner_iters).map_err(runtime)?;
        let f = out.estimate();
        let truth = DecodedFunction::evaluate(self.code.field(), self.code.b(), &f.coeffs, &f.delays, &[c1, c2]);
        let bit_errors = symbol_errors(&self.code.extract_message(&f.word), &self.code.extract_message(&truth));
        Ok(TrialOutcome {
            bit_errors,
            frame_error: !out.is_decoded() || f.word != truth,
        })
    }
}
