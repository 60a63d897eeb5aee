//! Experiment configuration files.

use std::fmt;
use std::path::{Path, PathBuf};

use idtqc::qc_ldpc::{CodeDescription, CodeParams, QcCode};
use idtqc::rates::RateCurve;
use idtqc::receivers::{ISI_BP_ITERS, JCF_INNER_ITERS, JCF_OUTER_ITERS};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    IsiBer,
    CfFrameBer,
    CfSymbolBer,
    Rates,
    Codegen,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::IsiBer => "isi_ber",
            ExperimentKind::CfFrameBer => "cf_frame_ber",
            ExperimentKind::CfSymbolBer => "cf_symbol_ber",
            ExperimentKind::Rates => "rates",
            ExperimentKind::Codegen => "codegen",
        }
    }
}

/// An SNR grid value in dB, or the noiseless sentinel `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Snr {
    Db(f64),
    Noiseless,
}

impl Snr {
    /// Transmit power and noise standard deviation. SNR is `P` over unit
    /// noise variance; the noiseless point uses `P = 1`.
    pub fn power_and_noise(self) -> (f64, f64) {
        match self {
            Snr::Db(db) => (10f64.powf(db / 10.0), 1.0),
            Snr::Noiseless => (1.0, 0.0),
        }
    }
}

impl fmt::Display for Snr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Snr::Db(db) => write!(f, "{db}"),
            Snr::Noiseless => f.write_str("inf"),
        }
    }
}

impl Serialize for Snr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Snr::Db(db) => s.serialize_f64(*db),
            Snr::Noiseless => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Snr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) if x.is_finite() => Ok(Snr::Db(x)),
            Raw::Text(t) if t == "inf" => Ok(Snr::Noiseless),
            _ => Err(de::Error::custom("expected a finite number of dB or \"inf\"")),
        }
    }
}

/// Where the code comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CodeSpec {
    /// A code description JSON written by `codegen`.
    File(PathBuf),
    Params(CodeParams),
    Description(CodeDescription),
}

impl CodeSpec {
    /// Desk-scale binary code with `N' = 1024`, `b = 16`, `K = 768`.
    pub fn desk() -> Self {
        CodeSpec::Params(CodeParams {
            p: 2,
            b: 16,
            check_rows: 4,
            l: 64,
            seed: 1,
        })
    }

    /// Paper-scale binary code with `N' = 4096`, `b = 32`, `K = 3072`.
    pub fn paper() -> Self {
        CodeSpec::Params(CodeParams {
            p: 2,
            b: 32,
            check_rows: 8,
            l: 128,
            seed: 1,
        })
    }

    pub fn build(&self, base: &Path) -> Result<QcCode, CliError> {
        let desc = match self {
            CodeSpec::Params(p) => return p.build().map_err(|e| CliError::Config(format!("code.params: {e}"))),
            CodeSpec::Description(d) => d.clone(),
            CodeSpec::File(path) => {
                let full = base.join(path);
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| CliError::Config(format!("code.file: {}: {e}", full.display())))?;
                let de = &mut serde_json::Deserializer::from_str(&text);
                serde_path_to_error::deserialize(de)
                    .map_err(|e| CliError::Config(format!("{}: {}: {}", full.display(), e.path(), e.inner())))?
            }
        };
        QcCode::from_description(&desc).map_err(|e| CliError::Config(format!("code: {e}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopRule {
    #[serde(default = "default_min_errors")]
    pub min_frame_errors: u64,
    #[serde(default = "default_max_frames")]
    pub max_frames: u64,
}

fn default_min_errors() -> u64 {
    100
}

fn default_max_frames() -> u64 {
    20_000
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            min_frame_errors: default_min_errors(),
            max_frames: default_max_frames(),
        }
    }
}

/// Integer taps of the ISI channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsiSpec {
    pub taps: Vec<i64>,
}

/// Frame-asynchronous scene. Power and noise come from the SNR grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSceneSpec {
    pub h: Vec<Vec<f64>>,
    /// Integer delays, relays by sources.
    pub tau: Vec<Vec<usize>>,
    #[serde(rename = "D_max")]
    pub d_max: usize,
    /// Per-relay integer coefficients; chosen by rate search when absent.
    #[serde(default)]
    pub coeffs: Option<Vec<Vec<i64>>>,
}

impl FrameSceneSpec {
    /// The two-relay scene whose coefficient matrix is `[[D, 1], [1, D]]`.
    pub fn example_one() -> Self {
        FrameSceneSpec {
            h: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
            tau: vec![vec![1, 0], vec![0, 1]],
            d_max: 1,
            coeffs: Some(vec![vec![1, 1], vec![1, 1]]),
        }
    }
}

/// Two-source relay with delay `tau = tau_f + tau_s` on the second source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSceneSpec {
    pub h: [f64; 2],
    pub tau: f64,
    #[serde(rename = "D_max")]
    pub d_max: usize,
}

impl Default for SymbolSceneSpec {
    fn default() -> Self {
        SymbolSceneSpec {
            h: [1.0, 1.0],
            tau: 0.5,
            d_max: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Checked against the subcommand when present.
    #[serde(default)]
    pub kind: Option<ExperimentKind>,
    #[serde(default)]
    pub code: Option<CodeSpec>,
    #[serde(default)]
    pub isi: Option<IsiSpec>,
    #[serde(default)]
    pub frame_scene: Option<FrameSceneSpec>,
    #[serde(default)]
    pub symbol_scene: Option<SymbolSceneSpec>,
    #[serde(default)]
    pub rates: Option<RateCurve>,
    #[serde(default)]
    pub snr_db: Option<Vec<Snr>>,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_bp_iters")]
    pub bp_iters: usize,
    #[serde(default = "default_outer")]
    pub outer_iters: usize,
    #[serde(default = "default_inner")]
    pub inner_iters: usize,
}

fn default_bp_iters() -> usize {
    ISI_BP_ITERS
}

fn default_outer() -> usize {
    JCF_OUTER_ITERS
}

fn default_inner() -> usize {
    JCF_INNER_ITERS
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: None,
            code: None,
            isi: None,
            frame_scene: None,
            symbol_scene: None,
            rates: None,
            snr_db: None,
            stop: StopRule::default(),
            seed: 0,
            out: None,
            bp_iters: default_bp_iters(),
            outer_iters: default_outer(),
            inner_iters: default_inner(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("at `{path}`: {}", e.into_inner()))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fills in per-kind defaults and checks the grids and stopping rule.
    pub fn resolve(mut self, kind: ExperimentKind, long_run: bool) -> Result<Self, CliError> {
        if let Some(k) = self.kind {
            if k != kind {
                return Err(CliError::Config(format!(
                    "at `kind`: config is for {} but the subcommand is {}",
                    k.name(),
                    kind.name()
                )));
            }
        }
        self.kind = Some(kind);
        if self.code.is_none() {
            self.code = Some(if long_run { CodeSpec::paper() } else { CodeSpec::desk() });
        }
        if long_run {
            self.stop.max_frames = self.stop.max_frames.max(10_000_000);
        }
        match kind {
            ExperimentKind::IsiBer => {
                self.isi.get_or_insert(IsiSpec { taps: vec![1, 1] });
                self.snr_db.get_or_insert(vec![Snr::Db(4.0), Snr::Db(5.0), Snr::Db(6.0)]);
            }
            ExperimentKind::CfFrameBer => {
                self.frame_scene.get_or_insert_with(FrameSceneSpec::example_one);
                self.snr_db.get_or_insert(vec![Snr::Db(5.0), Snr::Db(6.0), Snr::Db(7.0)]);
            }
            ExperimentKind::CfSymbolBer => {
                self.symbol_scene.get_or_insert_with(SymbolSceneSpec::default);
                self.snr_db.get_or_insert(vec![Snr::Db(3.0), Snr::Db(4.0), Snr::Db(5.0)]);
            }
            ExperimentKind::Rates => {
                self.rates.get_or_insert(RateCurve {
                    sources: 2,
                    relays: 2,
                    power: 10.0,
                    d_max: (0..=5).collect(),
                    n_realizations: 10_000,
                    a_bound: None,
                    p: 2,
                });
            }
            ExperimentKind::Codegen => {}
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |path: &str, msg: &str| Err(CliError::Config(format!("at `{path}`: {msg}")));
        let kind = self.kind.expect("resolved");
        let ber = matches!(
            kind,
            ExperimentKind::IsiBer | ExperimentKind::CfFrameBer | ExperimentKind::CfSymbolBer
        );
        if ber {
            if self.snr_db.as_ref().map_or(true, |g| g.is_empty()) {
                return bad("snr_db", "grid must be non-empty");
            }
            if self.stop.max_frames == 0 {
                return bad("stop.max_frames", "must be positive");
            }
        }
        if self.bp_iters == 0 || self.outer_iters == 0 || self.inner_iters == 0 {
            return bad("bp_iters", "iteration counts must be positive");
        }
        if let (ExperimentKind::IsiBer, Some(isi)) = (kind, &self.isi) {
            if isi.taps.is_empty() {
                return bad("isi.taps", "need at least one tap");
            }
        }
        if let (ExperimentKind::CfFrameBer, Some(sc)) = (kind, &self.frame_scene) {
            let m = sc.h.len();
            let s = sc.h.first().map_or(0, |r| r.len());
            if s == 0 || m != s {
                return bad("frame_scene.h", "need as many relays as sources, at least one");
            }
            if sc.h.iter().any(|r| r.len() != s) {
                return bad("frame_scene.h", "rows differ in length");
            }
            if sc.tau.len() != m || sc.tau.iter().any(|r| r.len() != s) {
                return bad("frame_scene.tau", "must match the shape of h");
            }
            if sc.tau.iter().flatten().any(|&t| t > sc.d_max) {
                return bad("frame_scene.tau", "delay exceeds D_max");
            }
            if let Some(c) = &sc.coeffs {
                if c.len() != m || c.iter().any(|r| r.len() != s) {
                    return bad("frame_scene.coeffs", "must match the shape of h");
                }
            }
        }
        if let (ExperimentKind::CfSymbolBer, Some(sc)) = (kind, &self.symbol_scene) {
            if !(sc.tau >= 0.0 && sc.tau < sc.d_max as f64) {
                return bad("symbol_scene.tau", "must lie in [0, D_max)");
            }
        }
        if let (ExperimentKind::Rates, Some(r)) = (kind, &self.rates) {
            if r.d_max.is_empty() {
                return bad("rates.d_max", "grid must be non-empty");
            }
            if r.n_realizations == 0 {
                return bad("rates.n_realizations", "must be positive");
            }
            if r.sources == 0 || r.relays < r.sources {
                return bad("rates.relays", "need at least as many relays as sources");
            }
        }
        Ok(())
    }
}
