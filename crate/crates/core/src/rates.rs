//! Achievable computation rates under frame- and symbol-level asynchronism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::max_window_snr;
use crate::error::{Error, Result};
use crate::galois::{Field, Poly, PolyMatrix};

/// A relay's gains `h`, integer coefficients `a` and transmit power.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateQuery {
    pub h: Vec<f64>,
    pub a: Vec<i64>,
    #[serde(rename = "P")]
    pub power: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub d_max: usize,
    pub n_realizations: usize,
    pub mean_rate: f64,
    pub seed: u64,
}

fn rate_terms(h: &[f64], a: &[i64]) -> (f64, f64, f64) {
    let aa: f64 = a.iter().map(|&x| (x * x) as f64).sum();
    let ha: f64 = h.iter().zip(a).map(|(&x, &y)| x * y as f64).sum();
    let hh: f64 = h.iter().map(|x| x * x).sum();
    (aa, ha, hh)
}

fn frame_rate_unchecked(h: &[f64], a: &[i64], power: f64) -> f64 {
    let (aa, ha, hh) = rate_terms(h, a);
    let denom = aa - power * ha * ha / (1.0 + power * hh);
    if denom <= 0.0 {
        return f64::INFINITY;
    }
    (0.5 * (1.0 / denom).log2()).max(0.0)
}

fn check_query(q: &RateQuery) -> Result<()> {
    if q.h.len() != q.a.len() {
        return Err(Error::domain("h and a differ in length"));
    }
    if q.a.iter().all(|&x| x == 0) {
        return Err(Error::domain("coefficient vector is zero"));
    }
    if !q.power.is_finite() || q.power < 0.0 {
        return Err(Error::domain(format!("power {} is not a finite nonnegative number", q.power)));
    }
    Ok(())
}

/// Computation rate in bits per real dimension for frame-level asynchronism:
/// `1/2 log+ (1 / (|a|^2 - P (h^T a)^2 / (1 + P |h|^2)))`.
pub fn comp_rate_frame(q: &RateQuery) -> Result<f64> {
    check_query(q)?;
    Ok(frame_rate_unchecked(&q.h, &q.a, q.power))
}

/// The frame rate with `P` replaced by the largest matched-filter window
/// SNR for the relay's fractional delays.
pub fn comp_rate_symbol(q: &RateQuery, delays: &[f64]) -> Result<f64> {
    check_query(q)?;
    if delays.len() != q.h.len() {
        return Err(Error::domain("one delay per source expected"));
    }
    let pm = max_window_snr(delays, q.power);
    Ok(frame_rate_unchecked(&q.h, &q.a, pm))
}

/// Default search radius `ceil(sqrt(1 + P |h|^2))`.
pub fn default_a_bound(h: &[f64], power: f64) -> i64 {
    let hh: f64 = h.iter().map(|x| x * x).sum();
    ((1.0 + power * hh).sqrt().ceil() as i64).max(1)
}

/// Nonzero vectors in `{-bound..bound}^s` in lexicographic order.
fn coefficient_box(s: usize, bound: i64) -> impl Iterator<Item = Vec<i64>> {
    let side = (2 * bound + 1) as usize;
    let total = side.pow(s as u32);
    (0..total)
        .map(move |mut idx| {
            let mut a = vec![0i64; s];
            for v in a.iter_mut().rev() {
                *v = (idx % side) as i64 - bound;
                idx /= side;
            }
            a
        })
        .filter(|a| a.iter().any(|&x| x != 0))
}

fn norm2(a: &[i64]) -> i64 {
    a.iter().map(|x| x * x).sum()
}

/// Candidates with positive rate, best first: rate descending, then smaller
/// `|a|^2`, then lexicographic.
fn ranked_candidates(h: &[f64], power: f64, bound: i64) -> Vec<(Vec<i64>, f64)> {
    let mut c: Vec<(Vec<i64>, f64)> = coefficient_box(h.len(), bound)
        .map(|a| {
            let r = frame_rate_unchecked(h, &a, power);
            (a, r)
        })
        .filter(|(_, r)| *r > 0.0)
        .collect();
    c.sort_by(|(a1, r1), (a2, r2)| {
        r2.partial_cmp(r1)
            .expect("rates are not NaN")
            .then(norm2(a1).cmp(&norm2(a2)))
            .then(a1.cmp(a2))
    });
    c
}

/// Exhaustive coefficient search. `a_bound` defaults to
/// [`default_a_bound`]. Ties go to the smaller `|a|^2`, then to the
/// lexicographically smaller vector.
pub fn best_coeffs(h: &[f64], power: f64, a_bound: Option<i64>) -> Result<(Vec<i64>, f64)> {
    if h.is_empty() {
        return Err(Error::domain("no sources"));
    }
    let bound = a_bound.unwrap_or_else(|| default_a_bound(h, power));
    if bound < 1 {
        return Err(Error::domain("a_bound must be at least 1"));
    }
    let mut best: Option<(Vec<i64>, f64)> = None;
    for a in coefficient_box(h.len(), bound) {
        let r = frame_rate_unchecked(h, &a, power);
        let better = match &best {
            None => true,
            Some((ba, br)) => r > *br || (r == *br && norm2(&a) < norm2(ba)),
        };
        if better {
            best = Some((a, r));
        }
    }
    Ok(best.expect("box is nonempty"))
}

/// Mixes a master seed with two indices into an independent stream seed.
pub fn derive_seed(master: u64, i: u64, j: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(mix(master) ^ i) ^ j.rotate_left(32))
}

/// Settings of a Monte-Carlo rate curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateCurve {
    pub sources: usize,
    pub relays: usize,
    #[serde(rename = "P")]
    pub power: f64,
    pub d_max: Vec<usize>,
    pub n_realizations: usize,
    #[serde(default)]
    pub a_bound: Option<i64>,
    #[serde(default = "default_p")]
    pub p: u32,
}

fn default_p() -> u32 {
    2
}

/// Whether the rows of `rows` (coefficients and delays) are independent
/// over `F_p(D)`: some maximal minor is a nonzero polynomial.
fn rows_independent(field: Field, rows: &[(Vec<i64>, Vec<usize>)], len: usize) -> bool {
    let k = rows.len();
    let s = rows[0].0.len();
    let mut cols: Vec<usize> = (0..k).collect();
    loop {
        let m = PolyMatrix::from_fn(field, k, k, |i, j| {
            let c = cols[j];
            Poly::monomial(field, field.reduce(rows[i].0[c]), rows[i].1[c], len)
        })
        .expect("square minor");
        if !m.det(len).expect("square minor").is_zero() {
            return true;
        }
        // next k-subset of 0..s
        let mut i = k;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if cols[i] < s - k + i {
                break;
            }
        }
        cols[i] += 1;
        for j in i + 1..k {
            cols[j] = cols[j - 1] + 1;
        }
    }
}

/// The realization rate for one delay matrix: the `S` relays with the
/// highest best rate are processed weakest first, each taking its best
/// candidate that keeps the chosen rows independent; the result is the
/// smallest chosen rate, or 0 if some relay runs out of candidates.
fn realization_rate(field: Field, sources: usize, ranked: &[Vec<(Vec<i64>, f64)>], delays: &[Vec<usize>], len: usize) -> f64 {
    let mut order: Vec<usize> = (0..ranked.len()).collect();
    let top = |m: usize| ranked[m].first().map_or(0.0, |c| c.1);
    order.sort_by(|&x, &y| top(y).partial_cmp(&top(x)).expect("not NaN").then(x.cmp(&y)));
    order.truncate(sources);
    order.reverse();
    let mut chosen: Vec<(Vec<i64>, Vec<usize>)> = Vec::with_capacity(sources);
    let mut rate = f64::INFINITY;
    for &m in &order {
        let mut picked = None;
        for (a, r) in &ranked[m] {
            chosen.push((a.clone(), delays[m].clone()));
            if rows_independent(field, &chosen, len) {
                picked = Some(*r);
                break;
            }
            chosen.pop();
        }
        match picked {
            Some(r) => rate = rate.min(r),
            None => return 0.0,
        }
    }
    if rate.is_finite() {
        rate
    } else {
        0.0
    }
}

/// Average computation rate versus `D_max`. Gains are real standard
/// Gaussian; delays are uniform in `{0..D_max}`. Each realization uses the
/// stream `derive_seed(seed, 0, r)` and shares its gains across the grid.
pub fn monte_carlo_rates(curve: &RateCurve, seed: u64) -> Result<Vec<RatePoint>> {
    let (s, m_count) = (curve.sources, curve.relays);
    if s == 0 || m_count < s {
        return Err(Error::domain("need at least as many relays as sources, and S > 0"));
    }
    if curve.d_max.is_empty() || curve.n_realizations == 0 {
        return Err(Error::domain("empty D_max grid or zero realizations"));
    }
    if !(curve.power > 0.0 && curve.power.is_finite()) {
        return Err(Error::domain("power must be positive"));
    }
    let field = Field::new(curve.p)?;
    let per_realization: Vec<Vec<f64>> = (0..curve.n_realizations)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, r as u64));
            let h: Vec<Vec<f64>> = (0..m_count)
                .map(|_| (0..s).map(|_| rng.sample(StandardNormal)).collect())
                .collect();
            let u: Vec<Vec<f64>> = (0..m_count).map(|_| (0..s).map(|_| rng.gen::<f64>()).collect()).collect();
            let ranked: Vec<Vec<(Vec<i64>, f64)>> = h
                .iter()
                .map(|hm| {
                    let bound = curve.a_bound.unwrap_or_else(|| default_a_bound(hm, curve.power));
                    ranked_candidates(hm, curve.power, bound)
                })
                .collect();
            curve
                .d_max
                .iter()
                .map(|&d| {
                    let delays: Vec<Vec<usize>> = u
                        .iter()
                        .map(|row| row.iter().map(|&x| ((x * (d + 1) as f64) as usize).min(d)).collect())
                        .collect();
                    realization_rate(field, s, &ranked, &delays, s * d + 1)
                })
                .collect()
        })
        .collect();
    Ok(curve
        .d_max
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let sum: f64 = per_realization.iter().map(|v| v[i]).sum();
            RatePoint {
                d_max: d,
                n_realizations: curve.n_realizations,
                mean_rate: sum / curve.n_realizations as f64,
                seed,
            }
        })
        .collect())
}
