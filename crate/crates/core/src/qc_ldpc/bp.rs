//! Flooding sum-product decoding.
//!
//! Binary codes use the log-likelihood-ratio form with the tanh rule. Larger
//! alphabets run the probability-domain decoder over the additive group
//! `Z_p^m`, where a check is satisfied when its neighbours sum to zero in
//! every component. `m = 1` is ordinary non-binary decoding over `F_p`; `m = 2`
//! decodes pairs of codewords jointly, symbol pair by symbol pair.

use super::{QcCode, TannerGraph};
use crate::error::{Error, Result};

const LLR_CLAMP: f64 = 1e3;
const TANH_CLAMP: f64 = 1.0 - 1e-15;

/// Per-symbol channel evidence.
#[derive(Clone, Debug, PartialEq)]
pub enum Evidence {
    /// `ln P(0)/P(1)` per symbol; binary codes only.
    Llr(Vec<f64>),
    /// One probability vector of length `p` per symbol.
    Probabilities(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeResult {
    /// All parity checks satisfied after `iterations` iterations.
    Codeword { word: Vec<u32>, iterations: usize },
    /// Iteration budget exhausted. The last hard decision is kept for error
    /// accounting; it is not a codeword.
    Failure { hard_decision: Vec<u32> },
}

impl DecodeResult {
    pub fn is_success(&self) -> bool {
        matches!(self, DecodeResult::Codeword { .. })
    }

    pub fn codeword(&self) -> Option<&[u32]> {
        match self {
            DecodeResult::Codeword { word, .. } => Some(word),
            DecodeResult::Failure { .. } => None,
        }
    }

    /// The codeword on success, otherwise the final hard decision.
    pub fn best_guess(&self) -> &[u32] {
        match self {
            DecodeResult::Codeword { word, .. } => word,
            DecodeResult::Failure { hard_decision } => hard_decision,
        }
    }
}

/// Sum-product decoding with early exit once all checks are satisfied.
/// Hard decisions break ties towards symbol 0.
pub fn bp_decode(code: &QcCode, evidence: &Evidence, max_iters: usize) -> Result<DecodeResult> {
    let n = code.n();
    let p = code.field().p();
    match evidence {
        Evidence::Llr(llr) => {
            if p != 2 {
                return Err(Error::domain("LLR evidence needs a binary code"));
            }
            if llr.len() != n {
                return Err(Error::domain(format!("{} LLRs for length {n}", llr.len())));
            }
            Ok(decode_binary(code, llr, max_iters))
        }
        Evidence::Probabilities(probs) => {
            if probs.len() != n {
                return Err(Error::domain(format!("{} evidence vectors for length {n}", probs.len())));
            }
            if probs.iter().any(|v| v.len() != p as usize) {
                return Err(Error::domain(format!("evidence vectors must have length {p}")));
            }
            if p == 2 {
                let llr: Vec<f64> = probs.iter().map(|v| (v[0] / v[1]).ln()).collect();
                return Ok(decode_binary(code, &llr, max_iters));
            }
            let flat: Vec<f64> = probs.iter().flatten().copied().collect();
            let mut bp = GroupBp::new(code, 1);
            let post = bp.run(&flat, max_iters, |hard| code.is_codeword(hard));
            let hard: Vec<u32> = post.hard.iter().map(|&s| s as u32).collect();
            Ok(if post.converged {
                DecodeResult::Codeword {
                    word: hard,
                    iterations: post.iterations,
                }
            } else {
                DecodeResult::Failure { hard_decision: hard }
            })
        }
    }
}

#[cfg(test)]
fn decode_binary_posterior(code: &QcCode, llr: &[f64], iters: usize) -> Vec<f64> {
    let g = code.graph();
    let mut c2v = vec![0.0f64; g.n_edges()];
    let mut v2c = vec![0.0f64; g.n_edges()];
    for _ in 0..iters {
        for (v, edges) in g.var_edges.iter().enumerate() {
            let total = llr[v] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
            for &e in edges {
                v2c[e] = total - c2v[e];
            }
        }
        for c in 0..g.n_checks() {
            let r = g.check_edges(c);
            for e in r.clone() {
                let prod: f64 = r.clone().filter(|&o| o != e).map(|o| (0.5 * v2c[o]).tanh()).product();
                c2v[e] = 2.0 * prod.atanh();
            }
        }
    }
    g.var_edges.iter().enumerate().map(|(v, edges)| llr[v] + edges.iter().map(|&e| c2v[e]).sum::<f64>()).collect()
}

fn decode_binary(code: &QcCode, llr_in: &[f64], max_iters: usize) -> DecodeResult {
    let g = code.graph();
    let llr: Vec<f64> = llr_in
        .iter()
        .map(|&x| if x.is_nan() { 0.0 } else { x.clamp(-LLR_CLAMP, LLR_CLAMP) })
        .collect();
    let mut hard: Vec<u32> = llr.iter().map(|&x| (x < 0.0) as u32).collect();
    if code.is_codeword(&hard) {
        return DecodeResult::Codeword { word: hard, iterations: 0 };
    }
    let mut c2v = vec![0.0f64; g.n_edges()];
    let mut v2c = vec![0.0f64; g.n_edges()];
    let mut t = Vec::new();
    let mut suffix = Vec::new();
    for it in 1..=max_iters {
        for (v, edges) in g.var_edges.iter().enumerate() {
            let total = llr[v] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
            for &e in edges {
                v2c[e] = total - c2v[e];
            }
        }
        for c in 0..g.n_checks() {
            let r = g.check_edges(c);
            t.clear();
            t.extend(r.clone().map(|e| (0.5 * v2c[e]).tanh()));
            suffix.clear();
            suffix.resize(t.len() + 1, 1.0);
            for k in (0..t.len()).rev() {
                suffix[k] = suffix[k + 1] * t[k];
            }
            let mut prefix = 1.0;
            for (k, e) in r.enumerate() {
                let prod = (prefix * suffix[k + 1]).clamp(-TANH_CLAMP, TANH_CLAMP);
                c2v[e] = 2.0 * prod.atanh();
                prefix *= t[k];
            }
        }
        for (v, edges) in g.var_edges.iter().enumerate() {
            let post = llr[v] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
            hard[v] = (post < 0.0) as u32;
        }
        if code.is_codeword(&hard) {
            return DecodeResult::Codeword { word: hard, iterations: it };
        }
    }
    DecodeResult::Failure { hard_decision: hard }
}

/// Output of [`GroupBp::run`].
#[derive(Clone, Debug)]
pub struct GroupPosterior {
    /// Normalized posteriors, `q` entries per variable.
    pub posterior: Vec<f64>,
    /// Check-to-variable products (posterior without channel evidence),
    /// normalized, `q` entries per variable.
    pub extrinsic: Vec<f64>,
    /// Most likely symbol index per variable.
    pub hard: Vec<usize>,
    pub iterations: usize,
    /// Whether the stopping predicate fired.
    pub converged: bool,
}

/// Probability-domain decoder over `Z_p^m` that keeps its edge messages
/// between calls, so it can sit inside an outer detection loop.
pub struct GroupBp<'a> {
    graph: &'a TannerGraph,
    q: usize,
    add: Vec<usize>,
    neg: Vec<usize>,
    c2v: Vec<f64>,
    v2c: Vec<f64>,
}

impl<'a> GroupBp<'a> {
    /// Decoder for `digits`-tuples of symbols of `code`'s field. Symbol
    /// index `s` encodes the tuple `(s mod p, (s / p) mod p, ...)`.
    pub fn new(code: &'a QcCode, digits: usize) -> Self {
        let p = code.field().p() as usize;
        let q = p.pow(digits as u32);
        let split = |mut s: usize| {
            let mut d = Vec::with_capacity(digits);
            for _ in 0..digits {
                d.push(s % p);
                s /= p;
            }
            d
        };
        let join = |d: &[usize]| d.iter().rev().fold(0usize, |acc, &x| acc * p + x);
        let mut add = vec![0usize; q * q];
        let mut neg = vec![0usize; q];
        for a in 0..q {
            let da = split(a);
            neg[a] = join(&da.iter().map(|&x| (p - x) % p).collect::<Vec<_>>());
            for b in 0..q {
                let db = split(b);
                let s: Vec<usize> = da.iter().zip(&db).map(|(&x, &y)| (x + y) % p).collect();
                add[a * q + b] = join(&s);
            }
        }
        let graph = code.graph();
        let e = graph.n_edges();
        GroupBp {
            graph,
            q,
            add,
            neg,
            c2v: vec![1.0 / q as f64; e * q],
            v2c: vec![1.0 / q as f64; e * q],
        }
    }

    /// Alphabet size `p^m`.
    pub fn alphabet(&self) -> usize {
        self.q
    }

    /// Group addition on symbol indices.
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b]
    }

    /// Forgets all edge messages.
    pub fn reset(&mut self) {
        let u = 1.0 / self.q as f64;
        self.c2v.iter_mut().for_each(|x| *x = u);
        self.v2c.iter_mut().for_each(|x| *x = u);
    }

    fn convolve(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        let q = self.q;
        out.iter_mut().for_each(|x| *x = 0.0);
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            let row = &self.add[i * q..(i + 1) * q];
            for (j, &bj) in b.iter().enumerate() {
                out[row[j]] += ai * bj;
            }
        }
        normalize(out);
    }

    /// Runs up to `iters` flooding iterations against `channel` (`q` entries
    /// per variable), stopping early once `stop` accepts the hard decision.
    /// The stopping predicate is also consulted before the first iteration.
    pub fn run(&mut self, channel: &[f64], iters: usize, stop: impl Fn(&[u32]) -> bool) -> GroupPosterior {
        let q = self.q;
        let n = self.graph.var_edges.len();
        assert_eq!(channel.len(), n * q, "channel evidence has the wrong size");
        let mut out = self.posterior(channel);
        let as_u32 = |h: &[usize]| h.iter().map(|&s| s as u32).collect::<Vec<u32>>();
        if stop(&as_u32(&out.hard)) {
            out.converged = true;
            return out;
        }
        for it in 1..=iters {
            self.variable_update(channel);
            self.check_update();
            out = self.posterior(channel);
            out.iterations = it;
            if stop(&as_u32(&out.hard)) {
                out.converged = true;
                return out;
            }
        }
        out
    }

    fn variable_update(&mut self, channel: &[f64]) {
        let q = self.q;
        let mut prefix = vec![0.0f64; q];
        let mut suffix: Vec<f64> = Vec::new();
        for (v, edges) in self.graph.var_edges.iter().enumerate() {
            let d = edges.len();
            suffix.clear();
            suffix.resize((d + 1) * q, 1.0);
            for k in (0..d).rev() {
                let e = edges[k];
                for s in 0..q {
                    suffix[k * q + s] = suffix[(k + 1) * q + s] * self.c2v[e * q + s];
                }
                normalize(&mut suffix[k * q..(k + 1) * q]);
            }
            prefix.copy_from_slice(&channel[v * q..(v + 1) * q]);
            normalize(&mut prefix);
            for (k, &e) in edges.iter().enumerate() {
                let msg = &mut self.v2c[e * q..(e + 1) * q];
                for s in 0..q {
                    msg[s] = prefix[s] * suffix[(k + 1) * q + s];
                }
                normalize(msg);
                for s in 0..q {
                    prefix[s] *= self.c2v[e * q + s];
                }
                normalize(&mut prefix);
            }
        }
    }

    fn check_update(&mut self) {
        let q = self.q;
        let mut acc = vec![0.0f64; q];
        let mut tmp = vec![0.0f64; q];
        let mut suffix: Vec<f64> = Vec::new();
        for c in 0..self.graph.n_checks() {
            let r = self.graph.check_edges(c);
            let d = r.len();
            // suffix[k] = distribution of the sum of messages k..d
            suffix.clear();
            suffix.resize((d + 1) * q, 0.0);
            suffix[d * q] = 1.0;
            for k in (0..d).rev() {
                let e = r.start + k;
                let (head, tail) = suffix.split_at_mut((k + 1) * q);
                let next = &tail[..q];
                let cur = &mut head[k * q..];
                self.convolve(&self.v2c[e * q..(e + 1) * q], next, &mut tmp);
                cur.copy_from_slice(&tmp);
            }
            acc.iter_mut().for_each(|x| *x = 0.0);
            acc[0] = 1.0;
            for k in 0..d {
                let e = r.start + k;
                self.convolve(&acc, &suffix[(k + 1) * q..(k + 2) * q], &mut tmp);
                // neighbour value s is consistent when the others sum to -s
                for s in 0..q {
                    self.c2v[e * q + s] = tmp[self.neg[s]];
                }
                normalize(&mut self.c2v[e * q..(e + 1) * q]);
                let prev = acc.clone();
                self.convolve(&prev, &self.v2c[e * q..(e + 1) * q], &mut acc);
            }
        }
    }

    fn posterior(&self, channel: &[f64]) -> GroupPosterior {
        let q = self.q;
        let n = self.graph.var_edges.len();
        let mut posterior = vec![0.0f64; n * q];
        let mut extrinsic = vec![0.0f64; n * q];
        let mut hard = vec![0usize; n];
        for (v, edges) in self.graph.var_edges.iter().enumerate() {
            let ext = &mut extrinsic[v * q..(v + 1) * q];
            ext.iter_mut().for_each(|x| *x = 1.0);
            for &e in edges {
                for s in 0..q {
                    ext[s] *= self.c2v[e * q + s];
                }
                normalize(ext);
            }
            let post = &mut posterior[v * q..(v + 1) * q];
            for s in 0..q {
                post[s] = ext[s] * channel[v * q + s];
            }
            normalize(post);
            hard[v] = argmax(post);
        }
        GroupPosterior {
            posterior,
            extrinsic,
            hard,
            iterations: 0,
            converged: false,
        }
    }
}

/// Scales to unit sum; an all-zero vector becomes uniform.
pub(crate) fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 && s.is_finite() {
        v.iter_mut().for_each(|x| *x /= s);
    } else {
        let u = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|x| *x = u);
    }
}

/// First index of the maximum.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}
