//! Channel models: AWGN, integer-tap ISI, frame-asynchronous superposition and
//! the oversampled symbol-asynchronous two-source model.
//!
//! Every stochastic operation takes the rng explicitly. Delays are in symbol
//! units with symbol duration `T = 1`; gains are real.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `y = x + z` with `z ~ N(0, std^2)` i.i.d.
pub fn awgn<R: Rng + ?Sized>(x: &[f64], std: f64, rng: &mut R) -> Vec<f64> {
    x.iter().map(|&v| v + noise(std, rng)).collect()
}

fn noise<R: Rng + ?Sized>(std: f64, rng: &mut R) -> f64 {
    if std == 0.0 {
        0.0
    } else {
        std * rng.sample::<f64, _>(StandardNormal)
    }
}

/// Integer-valued ISI response `i_0 + i_1 D + ... + i_{D_max} D^{D_max}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsiChannel {
    pub taps: Vec<i64>,
    #[serde(default = "unit")]
    pub noise_std: f64,
}

fn unit() -> f64 {
    1.0
}

impl IsiChannel {
    pub fn new(taps: Vec<i64>, noise_std: f64) -> Result<Self> {
        let ch = IsiChannel { taps, noise_std };
        ch.validate()?;
        Ok(ch)
    }

    /// The dicode response `1 + D`.
    pub fn dicode(noise_std: f64) -> Self {
        IsiChannel {
            taps: vec![1, 1],
            noise_std,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.taps.first() {
            None => Err(Error::domain("ISI channel needs at least one tap")),
            Some(0) => Err(Error::domain("leading ISI tap must be nonzero")),
            _ if !(self.noise_std >= 0.0) => Err(Error::domain("noise std must be nonnegative")),
            _ => Ok(()),
        }
    }

    /// Largest delay `D`, i.e. number of taps minus one.
    pub fn memory(&self) -> usize {
        self.taps.len() - 1
    }
}

/// Linear convolution of `x` with the taps plus noise. The output has
/// `x.len() + memory` samples.
pub fn isi_apply<R: Rng + ?Sized>(x: &[f64], ch: &IsiChannel, rng: &mut R) -> Vec<f64> {
    let mut y = vec![0.0; x.len() + ch.memory()];
    for (d, &tap) in ch.taps.iter().enumerate() {
        if tap == 0 {
            continue;
        }
        for (n, &v) in x.iter().enumerate() {
            y[n + d] += tap as f64 * v;
        }
    }
    y.iter_mut().for_each(|v| *v += noise(ch.noise_std, rng));
    y
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SceneModel {
    /// Integer delays in `{0, ..., D_max}`.
    Frame,
    /// Real delays in `[0, D_max)`.
    Symbol,
}

/// Multi-source, multi-relay channel realization. `h[m][s]` and `tau[m][s]`
/// are the gain and delay from source `s` to relay `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfScene {
    #[serde(rename = "S")]
    pub sources: usize,
    #[serde(rename = "M")]
    pub relays: usize,
    #[serde(rename = "P")]
    pub power: f64,
    pub h: Vec<Vec<f64>>,
    pub tau: Vec<Vec<f64>>,
    #[serde(rename = "D_max")]
    pub d_max: usize,
    pub model: SceneModel,
    /// Receiver noise standard deviation; 1 in the paper's normalization.
    #[serde(default = "unit")]
    pub noise_std: f64,
}

impl CfScene {
    pub fn validate(&self) -> Result<()> {
        if self.sources == 0 || self.relays == 0 {
            return Err(Error::domain("scene needs at least one source and one relay"));
        }
        if !(self.power >= 0.0) || !self.power.is_finite() {
            return Err(Error::domain("power must be finite and nonnegative"));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::domain("noise std must be nonnegative"));
        }
        for (name, m) in [("h", &self.h), ("tau", &self.tau)] {
            if m.len() != self.relays || m.iter().any(|r| r.len() != self.sources) {
                return Err(Error::domain(format!(
                    "{name} must be {}x{} (relays x sources)",
                    self.relays, self.sources
                )));
            }
        }
        for row in &self.tau {
            for &t in row {
                let ok = match self.model {
                    SceneModel::Frame => t >= 0.0 && t.fract() == 0.0 && t <= self.d_max as f64,
                    SceneModel::Symbol => t >= 0.0 && t < self.d_max.max(1) as f64,
                };
                if !ok {
                    return Err(Error::domain(format!(
                        "delay {t} outside the {:?} model range for D_max = {}",
                        self.model, self.d_max
                    )));
                }
            }
        }
        Ok(())
    }

    /// Integer delays of relay `m` (frame model).
    pub fn int_delays(&self, m: usize) -> Vec<usize> {
        self.tau[m].iter().map(|&t| t as usize).collect()
    }

    /// Window SNRs of relay `m`'s matched filters.
    pub fn window_snrs(&self, m: usize) -> Vec<f64> {
        window_snrs(&self.tau[m], self.power)
    }
}

/// `y_m[n] = sum_s h_ms x_s[n - tau_ms] + z_m[n]`. The output covers the
/// longest frame plus `D_max` samples.
pub fn cf_frame_apply<R: Rng + ?Sized>(frames: &[Vec<f64>], scene: &CfScene, m: usize, rng: &mut R) -> Result<Vec<f64>> {
    if scene.model != SceneModel::Frame {
        return Err(Error::domain("frame-level superposition needs a frame scene"));
    }
    if frames.len() != scene.sources || m >= scene.relays {
        return Err(Error::domain("frame count or relay index does not match the scene"));
    }
    let delays = scene.int_delays(m);
    if delays.iter().any(|&d| d > scene.d_max) {
        return Err(Error::domain("delay exceeds D_max"));
    }
    let len = frames.iter().map(Vec::len).max().unwrap_or(0) + scene.d_max;
    let mut y = vec![0.0; len];
    for (s, x) in frames.iter().enumerate() {
        let (h, d) = (scene.h[m][s], delays[s]);
        for (n, &v) in x.iter().enumerate() {
            y[n + d] += h * v;
        }
    }
    y.iter_mut().for_each(|v| *v += noise(scene.noise_std, rng));
    Ok(y)
}

/// Matched-filter samples of two sources with rectangular pulses, source 2
/// lagging by `tau_f + tau_s`. With `x2d[t] = x2[t - tau_f]`:
///
/// * `odd[t]  = h1 x1[t] + h2 x2d[t-1]`, noise variance `sigma^2 / tau_s`,
///   for `t = 0..=N_tot` (the last one sees only `x2d[N_tot-1]`);
/// * `even[t] = h1 x1[t] + h2 x2d[t]`, noise variance `sigma^2 / (1 - tau_s)`,
///   for `t = 0..N_tot`,
///
/// where `N_tot = N + tau_f` and out-of-range symbols are silent.
#[derive(Clone, Debug, PartialEq)]
pub struct OversampledRx {
    pub odd: Vec<f64>,
    pub even: Vec<f64>,
    pub var_odd: f64,
    pub var_even: f64,
    pub gains: [f64; 2],
    pub tau_f: usize,
    pub tau_s: f64,
}

impl OversampledRx {
    /// Samples in time order: `odd[0], even[0], odd[1], ..., odd[N_tot]`.
    /// Only even samples appear when `tau_s = 0`.
    pub fn samples(&self) -> Vec<f64> {
        if self.odd.is_empty() {
            return self.even.clone();
        }
        let mut r = Vec::with_capacity(self.odd.len() + self.even.len());
        for t in 0..self.even.len() {
            r.push(self.odd[t]);
            r.push(self.even[t]);
        }
        r.push(self.odd[self.even.len()]);
        r
    }

    pub fn total_len(&self) -> usize {
        self.even.len()
    }
}

/// Splits a nonnegative relative delay into integer and fractional parts.
pub fn split_delay(tau: f64) -> Result<(usize, f64)> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::domain(format!("relative delay {tau} must be finite and nonnegative")));
    }
    let tf = tau.floor();
    Ok((tf as usize, tau - tf))
}

/// Oversampled reception at relay `m` for a two-source symbol scene. Source
/// 1 must not lag source 2.
pub fn cf_symbol_oversample<R: Rng + ?Sized>(
    frames: &[Vec<f64>],
    scene: &CfScene,
    m: usize,
    rng: &mut R,
) -> Result<OversampledRx> {
    if scene.sources != 2 || frames.len() != 2 || m >= scene.relays {
        return Err(Error::domain("oversampling model needs exactly two sources"));
    }
    let rel = scene.tau[m][1] - scene.tau[m][0];
    let (tau_f, tau_s) = split_delay(rel)?;
    oversample(&frames[0], &frames[1], [scene.h[m][0], scene.h[m][1]], tau_f, tau_s, scene.noise_std, rng)
}

/// Core of [`cf_symbol_oversample`] with explicit parameters.
pub fn oversample<R: Rng + ?Sized>(
    x1: &[f64],
    x2: &[f64],
    gains: [f64; 2],
    tau_f: usize,
    tau_s: f64,
    noise_std: f64,
    rng: &mut R,
) -> Result<OversampledRx> {
    if !(0.0..1.0).contains(&tau_s) {
        return Err(Error::domain(format!("fractional delay {tau_s} outside [0, 1)")));
    }
    let n_tot = x1.len().max(x2.len() + tau_f);
    let [h1, h2] = gains;
    let a = |t: usize| x1.get(t).copied().unwrap_or(0.0);
    let b = |t: usize| {
        if t >= tau_f {
            x2.get(t - tau_f).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    };
    let var_even = noise_std * noise_std / (1.0 - tau_s);
    let even: Vec<f64> = (0..n_tot)
        .map(|t| h1 * a(t) + h2 * b(t) + noise(var_even.sqrt(), rng))
        .collect();
    let (odd, var_odd) = if tau_s == 0.0 {
        (Vec::new(), f64::INFINITY)
    } else {
        let var = noise_std * noise_std / tau_s;
        let odd = (0..=n_tot)
            .map(|t| {
                let prev = if t > 0 { b(t - 1) } else { 0.0 };
                h1 * a(t) + h2 * prev + noise(var.sqrt(), rng)
            })
            .collect();
        (odd, var)
    };
    Ok(OversampledRx {
        odd,
        even,
        var_odd,
        var_even,
        gains,
        tau_f,
        tau_s,
    })
}

/// Per-window SNRs of the matched filters spanning successive arrivals
/// within one symbol. Delays are referenced to the earliest one and folded
/// into `[0, 1)`; window `i` runs from the `i`-th to the `(i+1)`-th sorted
/// delay, the last one up to `T = 1`. Returns `S` values `P * duration`.
pub fn window_snrs(delays: &[f64], power: f64) -> Vec<f64> {
    if delays.is_empty() {
        return Vec::new();
    }
    let min = delays.iter().copied().fold(f64::INFINITY, f64::min);
    let mut rel: Vec<f64> = delays.iter().map(|&t| (t - min).rem_euclid(1.0)).collect();
    rel.sort_by(|a, b| a.partial_cmp(b).expect("finite delays"));
    let mut out = Vec::with_capacity(rel.len());
    for i in 0..rel.len() {
        let end = rel.get(i + 1).copied().unwrap_or(1.0);
        out.push(power * (end - rel[i]));
    }
    out
}

/// `P_m`, the largest window SNR.
pub fn max_window_snr(delays: &[f64], power: f64) -> f64 {
    window_snrs(delays, power).into_iter().fold(0.0, f64::max)
}
