//! The interleave/deinterleave transform.
//!
//! A codeword is written column-wise into a `b x L` array and sent row by
//! row, so sub-block `s` carries positions `s, s+b, ..., s+(L-1)b`. The last
//! `S*D_max` symbols of every message sub-block are frozen to zero and every
//! parity sub-block gets a cyclic prefix of length `D_max`. A linear delay of
//! `tau <= D_max` symbols then becomes a circular shift of each sub-block by
//! `tau`, which after deinterleaving is the codeword shift `c^(b*tau)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galois::Field;

/// Natural map from `F_p` to a scaled `p`-PAM constellation.
///
/// `M(u) = u` for `u <= (p-1)/2`, `u - p` above that, and `u - 1/2` when
/// `p = 2`. Amplitudes are `scale * M(u)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PamMap {
    field: Field,
    scale: f64,
}

impl PamMap {
    /// Scaled so that uniform symbols have average energy `power`.
    pub fn new(field: Field, power: f64) -> Result<Self> {
        if !(power >= 0.0) || !power.is_finite() {
            return Err(Error::domain(format!("power must be finite and nonnegative, got {power}")));
        }
        Ok(PamMap {
            field,
            scale: (power / Self::mean_energy(field)).sqrt(),
        })
    }

    /// `E[M(u)^2]` for uniform `u`.
    pub fn mean_energy(field: Field) -> f64 {
        let p = field.p() as f64;
        if field.p() == 2 {
            0.25
        } else {
            (p * p - 1.0) / 12.0
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Unscaled lift `M(u)`.
    pub fn lift(field: Field, u: u32) -> f64 {
        let p = field.p();
        debug_assert!(u < p);
        if p == 2 {
            u as f64 - 0.5
        } else if u <= (p - 1) / 2 {
            u as f64
        } else {
            u as f64 - p as f64
        }
    }

    /// Offset added per unit of coefficient sum before folding: `1/2` for
    /// `p = 2`, zero otherwise.
    pub fn fold_offset(field: Field) -> f64 {
        if field.p() == 2 {
            0.5
        } else {
            0.0
        }
    }

    /// `phi`: nearest integer of `t`, reduced mod `p`. Input is in unscaled
    /// units with the `p = 2` offset already applied.
    pub fn fold(field: Field, t: f64) -> u32 {
        field.reduce(t.round() as i64)
    }

    pub fn map(&self, u: u32) -> f64 {
        self.scale * Self::lift(self.field, u)
    }

    pub fn map_all(&self, us: &[u32]) -> Vec<f64> {
        us.iter().map(|&u| self.map(u)).collect()
    }

    /// Inverse of [`PamMap::map`] on noiseless amplitudes, and the nearest
    /// point of the folded lattice otherwise.
    pub fn unmap(&self, x: f64) -> u32 {
        if self.scale == 0.0 {
            return 0;
        }
        Self::fold(self.field, x / self.scale + Self::fold_offset(self.field))
    }

    /// Amplitude of a frozen (zero) symbol.
    pub fn frozen_amplitude(&self) -> f64 {
        self.map(0)
    }
}

/// Framing parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdtConfig {
    /// Shifting constraint, the number of sub-blocks.
    pub b: usize,
    /// Sub-block length.
    #[serde(rename = "L")]
    pub l: usize,
    pub d_max: usize,
    /// Number of sources sharing the frozen tail budget.
    pub sources: usize,
    /// Message sub-blocks `r_d * b`.
    pub message_blocks: usize,
}

impl IdtConfig {
    pub fn new(b: usize, l: usize, d_max: usize, sources: usize, message_blocks: usize) -> Result<Self> {
        let cfg = IdtConfig {
            b,
            l,
            d_max,
            sources,
            message_blocks,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.b == 0 || self.l == 0 {
            return Err(Error::domain("b and L must be positive"));
        }
        if self.sources == 0 {
            return Err(Error::domain("at least one source"));
        }
        if self.message_blocks > self.b {
            return Err(Error::domain(format!(
                "{} message sub-blocks exceed b = {}",
                self.message_blocks, self.b
            )));
        }
        if self.frozen() >= self.l {
            return Err(Error::domain(format!(
                "frozen tail S*D_max = {} does not fit in L = {}",
                self.frozen(),
                self.l
            )));
        }
        Ok(())
    }

    /// `N' = b L`.
    pub fn n_prime(&self) -> usize {
        self.b * self.l
    }

    pub fn design_rate(&self) -> f64 {
        self.message_blocks as f64 / self.b as f64
    }

    /// Frozen tail length per message sub-block, `S * D_max`.
    pub fn frozen(&self) -> usize {
        self.sources * self.d_max
    }

    pub fn parity_blocks(&self) -> usize {
        self.b - self.message_blocks
    }

    /// Transmitted frame length `N' + (1 - r_d) b D_max`.
    pub fn frame_len(&self) -> usize {
        self.n_prime() + self.parity_blocks() * self.d_max
    }

    /// Information symbols per frame, `K - r_d b S D_max`.
    pub fn info_len(&self) -> usize {
        self.message_blocks * (self.l - self.frozen())
    }

    /// Message length of the underlying code, `K = r_d b L`.
    pub fn message_len(&self) -> usize {
        self.message_blocks * self.l
    }

    /// Cyclic prefix length of sub-block `s`.
    pub fn cp_len(&self, s: usize) -> usize {
        if s < self.message_blocks {
            0
        } else {
            self.d_max
        }
    }

    /// Frame offset at which sub-block `s` (including its prefix) starts.
    pub fn block_start(&self, s: usize) -> usize {
        s * self.l + s.saturating_sub(self.message_blocks) * self.d_max
    }
}

/// Sub-blocks of a framed signal, prefixes included.
#[derive(Clone, Debug, PartialEq)]
pub struct IdtFrame<T> {
    pub sub_blocks: Vec<Vec<T>>,
}

impl<T: Copy> IdtFrame<T> {
    /// The transmitted sequence.
    pub fn signal(&self) -> Vec<T> {
        self.sub_blocks.iter().flatten().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.sub_blocks.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_len(len: usize, b: usize, l: usize) -> Result<()> {
    if b == 0 || l == 0 || len != b * l {
        return Err(Error::domain(format!("length {len} is not b*L = {b}*{l}")));
    }
    Ok(())
}

/// Write column-wise, transmit row-wise: output sub-block `s` holds input
/// positions `s, s+b, ..., s+(L-1)b`.
pub fn interleave<T: Copy>(x: &[T], b: usize, l: usize) -> Result<Vec<T>> {
    check_len(x.len(), b, l)?;
    Ok((0..b).flat_map(|s| (0..l).map(move |k| x[k * b + s])).collect())
}

/// Inverse of [`interleave`].
pub fn deinterleave<T: Copy>(x: &[T], b: usize, l: usize) -> Result<Vec<T>> {
    check_len(x.len(), b, l)?;
    Ok((0..b * l).map(|n| x[(n % b) * l + n / b]).collect())
}

/// Inserts the frozen zeros: each message sub-block receives
/// `L - S D_max` information symbols followed by `S D_max` zeros.
pub fn embed_info(info: &[u32], cfg: &IdtConfig) -> Result<Vec<u32>> {
    if info.len() != cfg.info_len() {
        return Err(Error::domain(format!(
            "{} information symbols, frame carries {}",
            info.len(),
            cfg.info_len()
        )));
    }
    let free = cfg.l - cfg.frozen();
    let mut w = vec![0u32; cfg.message_len()];
    for (s, chunk) in info.chunks(free).enumerate().take(cfg.message_blocks) {
        w[s * cfg.l..s * cfg.l + chunk.len()].copy_from_slice(chunk);
    }
    Ok(w)
}

/// Drops the frozen positions of a code message.
pub fn extract_info(w: &[u32], cfg: &IdtConfig) -> Vec<u32> {
    let free = cfg.l - cfg.frozen();
    (0..cfg.message_blocks)
        .flat_map(|s| w[s * cfg.l..s * cfg.l + free].iter().copied())
        .collect()
}

/// Frames an interleaved signal: checks the frozen tails of the message
/// sub-blocks against `frozen` and prepends cyclic prefixes to the parity
/// sub-blocks.
pub fn frame<T: Copy + PartialEq>(x: &[T], cfg: &IdtConfig, frozen: T) -> Result<IdtFrame<T>> {
    cfg.validate()?;
    check_len(x.len(), cfg.b, cfg.l)?;
    let l = cfg.l;
    let mut sub_blocks = Vec::with_capacity(cfg.b);
    for s in 0..cfg.b {
        let block = &x[s * l..(s + 1) * l];
        if s < cfg.message_blocks {
            if block[l - cfg.frozen()..].iter().any(|v| *v != frozen) {
                return Err(Error::domain(format!("message sub-block {s} has a nonzero frozen position")));
            }
            sub_blocks.push(block.to_vec());
        } else {
            let mut out = Vec::with_capacity(l + cfg.d_max);
            out.extend_from_slice(&block[l - cfg.d_max..]);
            out.extend_from_slice(block);
            sub_blocks.push(out);
        }
    }
    Ok(IdtFrame { sub_blocks })
}

/// Encodes an information word: freezes tails, encodes, interleaves and
/// frames. Returns the codeword and the transmitted amplitudes.
pub fn transmit(
    code: &crate::qc_ldpc::QcCode,
    cfg: &IdtConfig,
    pam: &PamMap,
    info: &[u32],
) -> Result<(Vec<u32>, Vec<f64>)> {
    if code.b() != cfg.b || code.circulant() != cfg.l || code.message_blocks() != cfg.message_blocks {
        return Err(Error::domain("framing parameters do not match the code"));
    }
    let w = embed_info(info, cfg)?;
    let c = code.encode(&w)?;
    let xbar = interleave(&pam.map_all(&c), cfg.b, cfg.l)?;
    let framed = frame(&xbar, cfg, pam.frozen_amplitude())?;
    Ok((c, framed.signal()))
}

/// Codeword position carried by each transmitted symbol of a frame. Prefix
/// symbols map to the positions they copy.
pub fn frame_positions(cfg: &IdtConfig) -> Vec<usize> {
    let mut out = Vec::with_capacity(cfg.frame_len());
    for s in 0..cfg.b {
        let cp = cfg.cp_len(s);
        for j in (cfg.l - cp..cfg.l).chain(0..cfg.l) {
            out.push(j * cfg.b + s);
        }
    }
    out
}

/// True when codeword position `n` is a frozen message position.
pub fn is_frozen(cfg: &IdtConfig, n: usize) -> bool {
    let (s, j) = (n % cfg.b, n / cfg.b);
    s < cfg.message_blocks && j >= cfg.l - cfg.frozen()
}

/// Removes prefixes, returning the `b` windows of length `L` (concatenated)
/// whose start is shifted by `reference_delay`.
pub fn strip_cp(y: &[f64], cfg: &IdtConfig, reference_delay: usize) -> Result<Vec<f64>> {
    let needed = cfg.frame_len() + reference_delay;
    if y.len() < needed {
        return Err(Error::domain(format!(
            "received {} samples, framing needs {needed}",
            y.len()
        )));
    }
    let mut out = Vec::with_capacity(cfg.n_prime());
    for s in 0..cfg.b {
        let start = cfg.block_start(s) + cfg.cp_len(s) + reference_delay;
        out.extend_from_slice(&y[start..start + cfg.l]);
    }
    Ok(out)
}

/// Adds what a frozen symbol would have contributed at the head of the first
/// sub-block. An arrival with relative delay `d` leaves positions `0..d` of
/// sub-block 0 empty, where the circular shift expects its frozen tail.
pub fn fill_leading_frozen(windows: &mut [f64], arrivals: &[(f64, usize)], frozen_amplitude: f64) {
    for &(gain, delay) in arrivals {
        for v in windows.iter_mut().take(delay) {
            *v += gain * frozen_amplitude;
        }
    }
}

/// Receiver side of the transform for a single arrival delayed by `tau`:
/// drops prefixes, restores the frozen head, and deinterleaves. Noiseless
/// output is the pre-interleaver signal circularly shifted by `b*tau`.
pub fn unframe_and_transform(y: &[f64], cfg: &IdtConfig, tau: usize, frozen_amplitude: f64) -> Result<Vec<f64>> {
    if tau > cfg.d_max {
        return Err(Error::domain(format!("delay {tau} exceeds D_max = {}", cfg.d_max)));
    }
    let mut w = strip_cp(y, cfg, 0)?;
    fill_leading_frozen(&mut w, &[(1.0, tau)], frozen_amplitude);
    deinterleave(&w, cfg.b, cfg.l)
}

/// Symbols per channel use, before the `log2 p` factor, as an exact
/// fraction `(K - r_d b S D_max) / (N' + (1 - r_d) b D_max)`.
pub fn actual_rate_fraction(cfg: &IdtConfig, k: usize, sources: usize) -> (u64, u64) {
    let lost = cfg.message_blocks * sources * cfg.d_max;
    let num = k.saturating_sub(lost) as u64;
    let den = cfg.frame_len() as u64;
    (num, den)
}

/// Point-to-point actual rate in bits per channel use.
pub fn actual_rate_p2p(cfg: &IdtConfig, k: usize, p: u32) -> f64 {
    let (num, den) = actual_rate_fraction(cfg, k, 1);
    num as f64 * (p as f64).log2() / den as f64
}

/// Actual rate when `S = cfg.sources` sources share the frozen tail.
pub fn actual_rate_cf(cfg: &IdtConfig, k: usize, p: u32) -> f64 {
    let (num, den) = actual_rate_fraction(cfg, k, cfg.sources);
    num as f64 * (p as f64).log2() / den as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qc_ldpc::CodeParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pam_values() {
        let f5 = Field::new(5).unwrap();
        assert_eq!(PamMap::lift(f5, 3), -2.0);
        assert_eq!(PamMap::lift(f5, 4), -1.0);
        assert_eq!(PamMap::lift(f5, 2), 2.0);
        let f2 = Field::binary();
        assert_eq!(PamMap::lift(f2, 0), -0.5);
        assert_eq!(PamMap::lift(f2, 1), 0.5);
        let bpsk = PamMap::new(f2, 4.0).unwrap();
        assert_eq!(bpsk.map(0), -2.0);
        assert_eq!(bpsk.map(1), 2.0);
    }

    #[test]
    fn homomorphism_exhaustive() {
        for p in [2u32, 3, 5, 7] {
            let f = Field::new(p).unwrap();
            let off = PamMap::fold_offset(f);
            for u in 0..p {
                for v in 0..p {
                    let t = PamMap::lift(f, u) + PamMap::lift(f, v) + 2.0 * off;
                    assert_eq!(PamMap::fold(f, t), f.add(u, v), "p={p} u={u} v={v}");
                    assert_eq!(PamMap::fold(f, PamMap::lift(f, u) + off), u);
                }
            }
        }
    }

    #[test]
    fn unit_average_power() {
        for p in [2u32, 3, 5, 7] {
            let f = Field::new(p).unwrap();
            let pam = PamMap::new(f, 3.0).unwrap();
            let e: f64 = (0..p).map(|u| pam.map(u).powi(2)).sum::<f64>() / p as f64;
            assert!((e - 3.0).abs() < 1e-12);
            for u in 0..p {
                assert_eq!(pam.unmap(pam.map(u)), u);
            }
        }
    }

    #[test]
    fn interleaver_examples() {
        let x = [1, 2, 3, 4, 5, 6, 7, 8];
        assert_eq!(interleave(&x, 2, 4).unwrap(), vec![1, 3, 5, 7, 2, 4, 6, 8]);
        assert_eq!(deinterleave(&interleave(&x, 2, 4).unwrap(), 2, 4).unwrap(), x.to_vec());
        assert_eq!(interleave(&x, 1, 8).unwrap(), x.to_vec());
        assert!(interleave(&x, 3, 3).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y: Vec<u32> = (0..60).map(|_| rng.gen()).collect();
        assert_eq!(deinterleave(&interleave(&y, 5, 12).unwrap(), 5, 12).unwrap(), y);
    }

    #[test]
    fn framing_examples() {
        let cfg = IdtConfig::new(2, 4, 0, 1, 1).unwrap();
        let x = [1, 2, 3, 4, 5, 6, 7, 8];
        assert_eq!(frame(&x, &cfg, 0).unwrap().signal(), x.to_vec());

        let cfg = IdtConfig::new(2, 4, 1, 1, 1).unwrap();
        let f = frame(&[9, 8, 7, 0, 1, 2, 3, 4], &cfg, 0).unwrap();
        assert_eq!(f.sub_blocks[1], vec![4, 1, 2, 3, 4]);
        assert_eq!(f.len(), cfg.frame_len());
        assert!(matches!(frame(&[9, 8, 7, 6, 1, 2, 3, 4], &cfg, 0), Err(Error::Domain(_))));

        let big = IdtConfig::new(32, 128, 1, 1, 24).unwrap();
        assert_eq!(big.frame_len(), 4104);
        assert!(IdtConfig::new(2, 4, 2, 2, 1).is_err());
    }

    #[test]
    fn shift_by_two_example() {
        // b=2, L=4, D_max=1, tau=1: output is the input circularly shifted by 2
        let cfg = IdtConfig::new(2, 4, 1, 1, 1).unwrap();
        let xt = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 0.0, 8.0];
        let framed = frame(&interleave(&xt, 2, 4).unwrap(), &cfg, 0.0).unwrap().signal();
        let mut y = vec![0.0];
        y.extend(framed);
        let out = unframe_and_transform(&y, &cfg, 1, 0.0).unwrap();
        assert_eq!(out, vec![0.0, 8.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let mut y0 = y[1..].to_vec();
        y0.push(0.0);
        assert_eq!(unframe_and_transform(&y0, &cfg, 0, 0.0).unwrap(), xt.to_vec());
        assert!(unframe_and_transform(&y, &cfg, 2, 0.0).is_err());
    }

    #[test]
    fn delay_becomes_codeword_shift() {
        for p in [2u32, 3] {
            let code = CodeParams {
                p,
                b: 4,
                check_rows: 2,
                l: 8,
                seed: 3,
            }
            .build()
            .unwrap();
            let cfg = IdtConfig::new(4, 8, 2, 1, code.message_blocks()).unwrap();
            let pam = PamMap::new(code.field(), 1.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(p as u64);
            for _ in 0..20 {
                let info: Vec<u32> = (0..cfg.info_len()).map(|_| rng.gen_range(0..p)).collect();
                let (c, x) = transmit(&code, &cfg, &pam, &info).unwrap();
                for tau in 0..=cfg.d_max {
                    let mut y = vec![0.0; tau];
                    y.extend(&x);
                    y.resize(cfg.frame_len() + cfg.d_max, 0.0);
                    let out = unframe_and_transform(&y, &cfg, tau, pam.frozen_amplitude()).unwrap();
                    let got: Vec<u32> = out.iter().map(|&v| pam.unmap(v)).collect();
                    let n = c.len();
                    let shifted: Vec<u32> = (0..n).map(|i| c[(i + n - 4 * tau) % n]).collect();
                    assert_eq!(got, shifted);
                    assert!(code.is_codeword(&got));
                }
                assert_eq!(extract_info(&code.extract_message(&c), &cfg), info);
            }
        }
    }

    #[test]
    fn frame_positions_follow_the_signal() {
        let cfg = IdtConfig::new(3, 4, 1, 1, 2).unwrap();
        let c: Vec<u32> = (0..12).map(|i| if is_frozen(&cfg, i) { 0 } else { i as u32 + 1 }).collect();
        let framed = frame(&interleave(&c, 3, 4).unwrap(), &cfg, 0).unwrap().signal();
        let pos = frame_positions(&cfg);
        assert_eq!(pos.len(), framed.len());
        for (t, &n) in pos.iter().enumerate() {
            assert_eq!(framed[t], c[n]);
        }
    }

    #[test]
    fn actual_rates() {
        let cfg = IdtConfig::new(32, 128, 1, 1, 24).unwrap();
        assert_eq!(actual_rate_fraction(&cfg, 3072, 1), (3048, 4104));
        let cfg = IdtConfig::new(32, 128, 5, 2, 24).unwrap();
        assert_eq!(actual_rate_fraction(&cfg, 3072, 2), (2832, 4136));
        assert!((actual_rate_cf(&cfg, 3072, 2) - 2832.0 / 4136.0).abs() < 1e-15);
        let cfg = IdtConfig::new(32, 128, 0, 1, 24).unwrap();
        assert_eq!(actual_rate_p2p(&cfg, 3072, 2), 0.75);
    }
}
