//! Receivers for the ISI channel and for frame- and symbol-asynchronous
//! compute-and-forward.

use crate::channels::{CfScene, IsiChannel, OversampledRx};
use crate::error::{Error, Result};
use crate::galois::{deconvolve_tail, deconvolve_tail_unchecked, Field, Poly, PolyMatrix};
use crate::idt::{
    deinterleave, extract_info, fill_leading_frozen, frame_positions, interleave, is_frozen, strip_cp, IdtConfig,
    PamMap,
};
use crate::qc_ldpc::{bp_decode, Evidence, GroupBp, QcCode};

/// BP iteration budget of the ISI receiver.
pub const ISI_BP_ITERS: usize = 200;
pub const JCF_OUTER_ITERS: usize = 40;
pub const JCF_INNER_ITERS: usize = 5;

const MIN_NOISE_STD: f64 = 1e-6;

/// Folds real observations `t ~ v + noise`, with `v` an integer whose
/// residue mod `p` is the symbol of interest, into per-symbol evidence.
/// Each likelihood sums the Gaussian over the lattice translates within
/// `6 sigma + p` of `t`.
pub fn fold_evidence(field: Field, t: &[f64], sigma: f64) -> Evidence {
    let p = field.p() as usize;
    let sigma = sigma.max(MIN_NOISE_STD);
    let reach = ((6.0 * sigma + p as f64) / p as f64).ceil() as i64 + 1;
    let loglik = |x: f64, u: usize| {
        let k0 = ((x - u as f64) / p as f64).round() as i64;
        let terms: Vec<f64> = (k0 - reach..=k0 + reach)
            .map(|k| {
                let d = x - u as f64 - (k * p as i64) as f64;
                -d * d / (2.0 * sigma * sigma)
            })
            .collect();
        let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m + terms.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
    };
    if p == 2 {
        Evidence::Llr(t.iter().map(|&x| loglik(x, 0) - loglik(x, 1)).collect())
    } else {
        Evidence::Probabilities(
            t.iter()
                .map(|&x| {
                    let ll: Vec<f64> = (0..p).map(|u| loglik(x, u)).collect();
                    let m = ll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let e: Vec<f64> = ll.iter().map(|v| (v - m).exp()).collect();
                    let s: f64 = e.iter().sum();
                    e.into_iter().map(|v| v / s).collect()
                })
                .collect(),
        )
    }
}

/// Outcome of a message-level receiver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MessageDecode {
    Recovered(Vec<u32>),
    /// Decoding or deconvolution failed; `estimate` is the best guess, kept
    /// for bit-error accounting.
    FrameError { estimate: Vec<u32> },
}

impl MessageDecode {
    pub fn is_recovered(&self) -> bool {
        matches!(self, MessageDecode::Recovered(_))
    }

    pub fn estimate(&self) -> &[u32] {
        match self {
            MessageDecode::Recovered(w) => w,
            MessageDecode::FrameError { estimate } => estimate,
        }
    }
}

/// The linear function `f_m = sum_s b_ms c_s^(b tau_ms)` decoded at relay `m`.
/// Delays are referenced to the relay's earliest arrival.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodedFunction {
    pub relay: usize,
    pub coeffs: Vec<u32>,
    pub delays: Vec<usize>,
    pub word: Vec<u32>,
}

impl DecodedFunction {
    /// The function's value for given source codewords, for checking.
    pub fn evaluate(field: Field, b: usize, coeffs: &[u32], delays: &[usize], codewords: &[Vec<u32>]) -> Vec<u32> {
        let n = codewords[0].len();
        let mut f = vec![0u32; n];
        for ((&a, &d), c) in coeffs.iter().zip(delays).zip(codewords) {
            for (i, v) in f.iter_mut().enumerate() {
                let src = c[(i + n - (b * d) % n) % n];
                *v = field.add(*v, field.mul(a, src));
            }
        }
        f
    }
}

/// Outcome of a relay's function decoder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FunctionDecode {
    Decoded(DecodedFunction),
    /// Parity never satisfied; the word is the last hard decision.
    Outage(DecodedFunction),
}

impl FunctionDecode {
    pub fn is_decoded(&self) -> bool {
        matches!(self, FunctionDecode::Decoded(_))
    }

    pub fn decoded(&self) -> Option<&DecodedFunction> {
        match self {
            FunctionDecode::Decoded(f) => Some(f),
            FunctionDecode::Outage(_) => None,
        }
    }

    pub fn estimate(&self) -> &DecodedFunction {
        match self {
            FunctionDecode::Decoded(f) | FunctionDecode::Outage(f) => f,
        }
    }
}

fn check_compat(code: &QcCode, cfg: &IdtConfig) -> Result<()> {
    cfg.validate()?;
    if code.b() != cfg.b || code.circulant() != cfg.l || code.message_blocks() != cfg.message_blocks {
        return Err(Error::domain("framing parameters do not match the code"));
    }
    Ok(())
}

/// Deconvolves every message sub-block of `word` by `g`. The flag is false
/// when some sub-block had no consistent zero-tail solution; the unchecked
/// candidate is used for it.
fn deconvolve_messages(word: &[u32], g: &Poly, cfg: &IdtConfig) -> Result<(Vec<u32>, bool)> {
    let field = g.field();
    let l = cfg.l;
    let inter = interleave(word, cfg.b, l)?;
    let mut w = vec![0u32; cfg.message_len()];
    let mut consistent = true;
    for k in 0..cfg.message_blocks {
        let f = Poly::new(field, inter[k * l..(k + 1) * l].iter().copied());
        let c = match deconvolve_tail(&f, g, cfg.frozen()) {
            Ok(c) => c,
            Err(Error::DecodeFailure(_)) => {
                consistent = false;
                deconvolve_tail_unchecked(&f, g, cfg.frozen())?
            }
            Err(e) => return Err(e),
        };
        w[k * l..(k + 1) * l].copy_from_slice(c.coeffs());
    }
    Ok((w, consistent))
}

/// Integer-forcing ISI receiver: strips prefixes, decodes the combined
/// codeword `sum_d i_d c^(b d)` and deconvolves each message sub-block by
/// `sum_d i_d D^d`. Returns the information symbols.
pub fn isi_receive(
    y: &[f64],
    ch: &IsiChannel,
    code: &QcCode,
    cfg: &IdtConfig,
    pam: &PamMap,
    max_iters: usize,
) -> Result<MessageDecode> {
    check_compat(code, cfg)?;
    ch.validate()?;
    if ch.memory() > cfg.d_max {
        return Err(Error::domain(format!(
            "channel memory {} exceeds D_max = {}",
            ch.memory(),
            cfg.d_max
        )));
    }
    if pam.scale() == 0.0 {
        return Err(Error::domain("zero transmit power"));
    }
    let field = code.field();
    let mut w = strip_cp(y, cfg, 0)?;
    let arrivals: Vec<(f64, usize)> = ch.taps.iter().enumerate().map(|(d, &i)| (i as f64, d)).collect();
    fill_leading_frozen(&mut w, &arrivals, pam.frozen_amplitude());
    let yt = deinterleave(&w, cfg.b, cfg.l)?;
    let off = PamMap::fold_offset(field) * ch.taps.iter().sum::<i64>() as f64;
    let t: Vec<f64> = yt.iter().map(|v| v / pam.scale() + off).collect();
    let decoded = bp_decode(code, &fold_evidence(field, &t, ch.noise_std / pam.scale()), max_iters)?;
    let g = Poly::from_i64(field, &ch.taps);
    if g.is_zero() {
        return Err(Error::domain("taps vanish mod p"));
    }
    let (w, consistent) = deconvolve_messages(decoded.best_guess(), &g, cfg)?;
    let info = extract_info(&w, cfg);
    Ok(if decoded.is_success() && consistent {
        MessageDecode::Recovered(info)
    } else {
        MessageDecode::FrameError { estimate: info }
    })
}

/// MMSE scaling `alpha = P h^T a / (sigma^2 + P |h|^2)`; 1 when undefined.
pub fn mmse_alpha(h: &[f64], a: &[i64], power: f64, noise_var: f64) -> f64 {
    let hta: f64 = h.iter().zip(a).map(|(&x, &y)| x * y as f64).sum();
    let hh: f64 = h.iter().map(|x| x * x).sum();
    let den = noise_var + power * hh;
    if den > 0.0 {
        power * hta / den
    } else {
        1.0
    }
}

/// Frame-asynchronous relay: aligns to the earliest arrival, removes
/// prefixes, scales by the MMSE coefficient and decodes
/// `sum_s phi(a_s) c_s^(b (tau_s - tau_min))`.
#[allow(clippy::too_many_arguments)]
pub fn relay_receive_frame(
    y: &[f64],
    scene: &CfScene,
    m: usize,
    a: &[i64],
    code: &QcCode,
    cfg: &IdtConfig,
    pam: &PamMap,
    max_iters: usize,
) -> Result<FunctionDecode> {
    check_compat(code, cfg)?;
    if m >= scene.relays || a.len() != scene.sources {
        return Err(Error::domain("relay index or coefficient count does not match the scene"));
    }
    if a.iter().all(|&x| x == 0) {
        return Err(Error::domain("coefficient vector is zero"));
    }
    if pam.scale() == 0.0 {
        return Err(Error::domain("zero transmit power"));
    }
    let field = code.field();
    let h = &scene.h[m];
    let delays = scene.int_delays(m);
    let tmin = delays.iter().copied().min().unwrap_or(0);
    let rel: Vec<usize> = delays.iter().map(|d| d - tmin).collect();
    if rel.iter().any(|&d| d > cfg.d_max) {
        return Err(Error::domain("relative delay exceeds D_max"));
    }
    let noise_var = scene.noise_std * scene.noise_std;
    let alpha = mmse_alpha(h, a, scene.power, noise_var);

    let mut w = strip_cp(y, cfg, tmin)?;
    let arrivals: Vec<(f64, usize)> = h.iter().copied().zip(rel.iter().copied()).collect();
    fill_leading_frozen(&mut w, &arrivals, pam.frozen_amplitude());
    let yt = deinterleave(&w, cfg.b, cfg.l)?;
    let off = PamMap::fold_offset(field) * a.iter().sum::<i64>() as f64;
    let t: Vec<f64> = yt.iter().map(|v| alpha * v / pam.scale() + off).collect();
    let mismatch: f64 = h.iter().zip(a).map(|(&x, &y)| (alpha * x - y as f64).powi(2)).sum();
    let eff = (alpha * alpha * noise_var + scene.power * mismatch) / (pam.scale() * pam.scale());
    let decoded = bp_decode(code, &fold_evidence(field, &t, eff.sqrt()), max_iters)?;
    let function = DecodedFunction {
        relay: m,
        coeffs: a.iter().map(|&x| field.reduce(x)).collect(),
        delays: rel,
        word: decoded.best_guess().to_vec(),
    };
    Ok(if decoded.is_success() {
        FunctionDecode::Decoded(function)
    } else {
        FunctionDecode::Outage(function)
    })
}

/// The D-domain coefficient matrix with entries `b_ms D^{tau_ms}`.
pub fn coefficient_matrix(funcs: &[DecodedFunction], field: Field, l: usize) -> Result<PolyMatrix> {
    let s = funcs.first().map_or(0, |f| f.coeffs.len());
    if funcs.iter().any(|f| f.coeffs.len() != s || f.delays.len() != s) {
        return Err(Error::domain("functions disagree on the number of sources"));
    }
    if funcs.iter().any(|f| f.delays.iter().any(|&d| d >= l)) {
        return Err(Error::domain("delay does not fit in the sub-block"));
    }
    PolyMatrix::from_fn(field, funcs.len(), s, |i, j| {
        Poly::monomial(field, field.reduce(funcs[i].coeffs[j] as i64), funcs[i].delays[j], l)
    })
}

/// Recovers every source's information symbols from `S` decoded functions:
/// per sub-block, `adj(B) F = det(B) C`, followed by deconvolution of each
/// message sub-block by `det(B)` using its frozen tail.
pub fn central_recover(funcs: &[DecodedFunction], code: &QcCode, cfg: &IdtConfig) -> Result<Vec<Vec<u32>>> {
    central_estimate(funcs, code, cfg)?
        .into_iter()
        .map(|d| match d {
            MessageDecode::Recovered(w) => Ok(w),
            MessageDecode::FrameError { .. } => Err(Error::decode("functions are inconsistent with frozen tails")),
        })
        .collect()
}

/// As [`central_recover`], but a source whose deconvolution is inconsistent
/// yields a [`MessageDecode::FrameError`] carrying the unchecked estimate.
/// A singular coefficient matrix is still an error.
pub fn central_estimate(funcs: &[DecodedFunction], code: &QcCode, cfg: &IdtConfig) -> Result<Vec<MessageDecode>> {
    check_compat(code, cfg)?;
    let s = cfg.sources;
    if funcs.len() != s {
        return Err(Error::domain(format!("{} functions for {s} sources", funcs.len())));
    }
    if funcs.iter().any(|f| f.word.len() != code.n()) {
        return Err(Error::domain("function word length differs from the code length"));
    }
    let field = code.field();
    let l = cfg.l;
    let bbar = coefficient_matrix(funcs, field, l)?;
    let det = bbar.det(l)?;
    if det.is_zero() {
        return Err(Error::decode("the functions are dependent: det(B) = 0"));
    }
    let adj = bbar.adjugate(l)?;
    let inter = funcs
        .iter()
        .map(|f| interleave(&f.word, cfg.b, l))
        .collect::<Result<Vec<_>>>()?;
    let mut msgs = vec![vec![0u32; cfg.message_len()]; s];
    let mut consistent = vec![true; s];
    for k in 0..cfg.message_blocks {
        let fbar: Vec<Poly> = inter
            .iter()
            .map(|x| Poly::new(field, x[k * l..(k + 1) * l].iter().copied()))
            .collect();
        for (src, scaled) in adj.mul_vec(&fbar, l)?.iter().enumerate() {
            let c = match deconvolve_tail(scaled, &det, cfg.frozen()) {
                Ok(c) => c,
                Err(Error::DecodeFailure(_)) => {
                    consistent[src] = false;
                    deconvolve_tail_unchecked(scaled, &det, cfg.frozen())?
                }
                Err(e) => return Err(e),
            };
            msgs[src][k * l..(k + 1) * l].copy_from_slice(c.coeffs());
        }
    }
    Ok(msgs
        .iter()
        .zip(consistent)
        .map(|(w, ok)| {
            let info = extract_info(w, cfg);
            if ok {
                MessageDecode::Recovered(info)
            } else {
                MessageDecode::FrameError { estimate: info }
            }
        })
        .collect())
}

/// Joint zigzag detection and pair decoding for two binary sources under
/// symbol-level asynchronism.
///
/// The decoder targets `c_1 + c_2^(b delta)` with `delta = tau_f` when the
/// even-sample window is at least as long as the odd one and
/// `delta = tau_f + 1` otherwise. Coefficients of the result are `(1, 1)`.
pub fn jcf_decode(
    rx: &OversampledRx,
    code: &QcCode,
    cfg: &IdtConfig,
    pam: &PamMap,
    outer_iters: usize,
    inner_iters: usize,
) -> Result<FunctionDecode> {
    check_compat(code, cfg)?;
    if code.field().p() != 2 {
        return Err(Error::domain("joint detection is implemented for binary codes"));
    }
    if cfg.sources != 2 {
        return Err(Error::domain("joint detection needs two sources"));
    }
    if rx.tau_f > cfg.d_max {
        return Err(Error::domain("frame delay exceeds D_max"));
    }
    if rx.even.len() != cfg.frame_len() + rx.tau_f {
        return Err(Error::domain("sample count does not match the frame"));
    }
    // the odd window is used when it is the longer one and the shift fits
    let delta = if !rx.odd.is_empty() && rx.tau_f < cfg.d_max && rx.tau_s > 1.0 - rx.tau_s {
        rx.tau_f + 1
    } else {
        rx.tau_f
    };
    let mut det = Detector::new(rx, code, cfg, pam, delta);
    let (ok, word) = det.run(outer_iters, inner_iters);
    let f = DecodedFunction {
        relay: 0,
        coeffs: vec![1, 1],
        delays: vec![0, delta],
        word,
    };
    Ok(if ok {
        FunctionDecode::Decoded(f)
    } else {
        FunctionDecode::Outage(f)
    })
}

/// One chain variable of the zigzag detector: a transmitted symbol of
/// source 1 (`user = 0`) or of source 2 (`user = 1`), or silence.
#[derive(Clone, Copy)]
enum ChainVar {
    Silent,
    Symbol { user: usize, pos: usize },
}

struct Detector<'a> {
    code: &'a QcCode,
    cfg: &'a IdtConfig,
    delta: usize,
    vars: Vec<ChainVar>,
    /// `psi[k]`: likelihood of sample linking vars `k` and `k+1`, indexed
    /// `[u][v]`.
    psi: Vec<[[f64; 2]; 2]>,
    /// Unary likelihood on var 0.
    head: [f64; 2],
    /// Decoder variable `n` reads the factor `pair_factor[n]`, with the
    /// source-1 symbol on side `x1_side` (0 = left variable).
    pair_factor: Vec<Option<usize>>,
    x1_side: usize,
}

impl<'a> Detector<'a> {
    fn new(rx: &OversampledRx, code: &'a QcCode, cfg: &'a IdtConfig, pam: &PamMap, delta: usize) -> Self {
        let n_frame = cfg.frame_len();
        let n_tot = rx.even.len();
        let tau_f = rx.tau_f;
        let positions = frame_positions(cfg);
        let mut vars = Vec::with_capacity(2 * n_tot + 1);
        for t in 0..=n_tot {
            vars.push(if t < n_frame {
                ChainVar::Symbol {
                    user: 0,
                    pos: positions[t],
                }
            } else {
                ChainVar::Silent
            });
            if t < n_tot {
                vars.push(if t >= tau_f {
                    ChainVar::Symbol {
                        user: 1,
                        pos: positions[t - tau_f],
                    }
                } else {
                    ChainVar::Silent
                });
            }
        }
        let amp = |v: ChainVar, bit: usize| match v {
            ChainVar::Silent => 0.0,
            ChainVar::Symbol { .. } => pam.map(bit as u32),
        };
        let [h1, h2] = rx.gains;
        let lik = |r: f64, mean: f64, var: f64| (-(r - mean) * (r - mean) / (2.0 * var)).exp();
        let var_even = rx.var_even.max(MIN_NOISE_STD * MIN_NOISE_STD);
        let var_odd = rx.var_odd.max(MIN_NOISE_STD * MIN_NOISE_STD);
        let has_odd = !rx.odd.is_empty();
        let mut psi = Vec::with_capacity(vars.len() - 1);
        for k in 0..vars.len() - 1 {
            let mut f = [[1.0; 2]; 2];
            let (left, right) = (vars[k], vars[k + 1]);
            let sample = if k % 2 == 0 {
                // even[t]: x1[t] (left) and x2d[t] (right)
                Some((rx.even[k / 2], var_even, h1, h2))
            } else if has_odd {
                // odd[t+1]: x2d[t] (left) and x1[t+1] (right)
                Some((rx.odd[k / 2 + 1], var_odd, h2, h1))
            } else {
                None
            };
            if let Some((r, var, hl, hr)) = sample {
                let mut means = [[0.0; 2]; 2];
                let mut best = f64::INFINITY;
                for u in 0..2 {
                    for v in 0..2 {
                        means[u][v] = hl * amp(left, u) + hr * amp(right, v);
                        best = best.min((r - means[u][v]).abs());
                    }
                }
                // scale by the closest hypothesis to avoid underflow
                for u in 0..2 {
                    for v in 0..2 {
                        let d = (r - means[u][v]).abs();
                        f[u][v] = lik(d, best, var).max(f64::MIN_POSITIVE);
                    }
                }
            }
            psi.push(f);
        }
        let mut head = [1.0; 2];
        if has_odd {
            let r = rx.odd[0];
            let m0 = h1 * amp(vars[0], 0);
            let m1 = h1 * amp(vars[0], 1);
            let best = (r - m0).abs().min((r - m1).abs());
            head = [
                lik((r - m0).abs(), best, var_odd).max(f64::MIN_POSITIVE),
                lik((r - m1).abs(), best, var_odd).max(f64::MIN_POSITIVE),
            ];
        }

        let b = cfg.b;
        let even_align = delta == tau_f;
        let pair_factor = (0..code.n())
            .map(|n| {
                let (s, j) = (n % b, n / b);
                let t1 = cfg.block_start(s) + cfg.cp_len(s) + j;
                if even_align {
                    Some(2 * t1)
                } else if t1 == 0 {
                    None
                } else {
                    Some(2 * t1 - 1)
                }
            })
            .collect();
        Detector {
            code,
            cfg,
            delta,
            vars,
            psi,
            head,
            pair_factor,
            x1_side: if even_align { 0 } else { 1 },
        }
    }

    /// Decoder variable and pair component that a chain variable feeds.
    fn decoder_slot(&self, v: ChainVar) -> Option<(usize, usize)> {
        match v {
            ChainVar::Silent => None,
            ChainVar::Symbol { user: 0, pos } => Some((pos, 0)),
            ChainVar::Symbol { pos, .. } => {
                let n = self.code.n();
                Some(((pos + self.cfg.b * self.delta) % n, 1))
            }
        }
    }

    fn priors(&self, ext: &[[f64; 2]]) -> Vec<[f64; 2]> {
        self.vars
            .iter()
            .map(|&v| match v {
                ChainVar::Silent => [1.0, 0.0],
                ChainVar::Symbol { pos, .. } if is_frozen(self.cfg, pos) => [1.0, 0.0],
                _ => {
                    let (n, comp) = self.decoder_slot(v).expect("symbol");
                    let p1 = if comp == 0 {
                        ext[n][0]
                    } else {
                        ext[n][1]
                    };
                    [1.0 - p1, p1]
                }
            })
            .collect()
    }

    /// Forward-backward over the chain; returns decoder evidence, four
    /// entries per variable indexed `c1 + 2 c2'`.
    fn detect(&self, priors: &[[f64; 2]]) -> Vec<f64> {
        let k_len = self.vars.len();
        let unary = |k: usize, u: usize| if k == 0 { self.head[u] } else { 1.0 };
        let mut fwd = vec![[1.0f64; 2]; k_len];
        for k in 0..k_len - 1 {
            let mut next = [0.0; 2];
            for (v, nv) in next.iter_mut().enumerate() {
                *nv = (0..2)
                    .map(|u| fwd[k][u] * priors[k][u] * unary(k, u) * self.psi[k][u][v])
                    .sum();
            }
            fwd[k + 1] = normalized(next);
        }
        let mut bwd = vec![[1.0f64; 2]; k_len];
        for k in (0..k_len - 1).rev() {
            let mut cur = [0.0; 2];
            for (u, cu) in cur.iter_mut().enumerate() {
                *cu = (0..2)
                    .map(|v| self.psi[k][u][v] * priors[k + 1][v] * unary(k + 1, v) * bwd[k + 1][v])
                    .sum();
            }
            bwd[k] = normalized(cur);
        }
        let n = self.code.n();
        let mut ev = vec![0.0f64; 4 * n];
        for var in 0..n {
            let e = &mut ev[4 * var..4 * var + 4];
            match self.pair_factor[var] {
                Some(k) => {
                    for u in 0..2 {
                        for v in 0..2 {
                            let val = fwd[k][u] * unary(k, u) * self.psi[k][u][v] * unary(k + 1, v) * bwd[k + 1][v];
                            let (x1, x2) = if self.x1_side == 0 { (u, v) } else { (v, u) };
                            e[x1 + 2 * x2] = val;
                        }
                    }
                }
                None => {
                    for u in 0..2 {
                        e[u] = fwd[0][u] * unary(0, u) * bwd[0][u];
                    }
                }
            }
            let frozen1 = is_frozen(self.cfg, var);
            let frozen2 = is_frozen(self.cfg, (var + n - (self.cfg.b * self.delta) % n) % n);
            for (idx, x) in e.iter_mut().enumerate() {
                if (frozen1 && idx & 1 == 1) || (frozen2 && idx & 2 == 2) {
                    *x = 0.0;
                }
            }
            let s: f64 = e.iter().sum();
            if s > 0.0 && s.is_finite() {
                e.iter_mut().for_each(|x| *x /= s);
            } else {
                e.iter_mut().for_each(|x| *x = 0.25);
            }
        }
        ev
    }

    fn run(&mut self, outer: usize, inner: usize) -> (bool, Vec<u32>) {
        let n = self.code.n();
        let mut bp = GroupBp::new(self.code, 2);
        let mut ext = vec![[0.5f64; 2]; n];
        let mut word = vec![0u32; n];
        for _ in 0..outer.max(1) {
            let ev = self.detect(&self.priors(&ext));
            for _ in 0..inner.max(1) {
                let post = bp.run(&ev, 1, |_| false);
                for (v, w) in word.iter_mut().enumerate() {
                    let q = &post.posterior[4 * v..4 * v + 4];
                    *w = (q[1] + q[2] > q[0] + q[3]) as u32;
                }
                if self.code.is_codeword(&word) {
                    return (true, word);
                }
                for (v, e) in ext.iter_mut().enumerate() {
                    let q = &post.extrinsic[4 * v..4 * v + 4];
                    *e = [q[1] + q[3], q[2] + q[3]];
                }
            }
        }
        (false, word)
    }
}

fn normalized(v: [f64; 2]) -> [f64; 2] {
    let s = v[0] + v[1];
    if s > 0.0 && s.is_finite() {
        [v[0] / s, v[1] / s]
    } else {
        [0.5, 0.5]
    }
}
