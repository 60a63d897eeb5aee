//! Prime-field arithmetic and polynomials over `F_p`.
//!
//! Polynomials are stored densely, coefficient `k` multiplying `D^k`. Most of
//! the work happens in the ring `F_p[D]/(D^L - 1)` where multiplication is a
//! circular convolution of length `L`; delays introduced by the channel show
//! up there as powers of `D`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A prime field `F_p`. Elements are plain `u32` values in `0..p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Field {
    p: u32,
}

impl Field {
    /// Largest supported modulus. Products of two elements must fit in `u64`
    /// and alphabets are enumerated densely, so large primes are rejected.
    pub const MAX_P: u32 = 65_521;

    pub fn new(p: u32) -> Result<Self> {
        if p < 2 || p > Self::MAX_P || !is_prime(p) {
            return Err(Error::domain(format!("{p} is not a supported prime modulus")));
        }
        Ok(Field { p })
    }

    /// The binary field, used by every simulation in the paper.
    pub const fn binary() -> Self {
        Field { p: 2 }
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    /// Reduces any integer into `0..p`.
    #[inline]
    pub fn reduce(&self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(&self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self, a: u32) -> Result<u32> {
        if a % self.p == 0 {
            return Err(Error::domain("inverse of zero"));
        }
        Ok(self.pow(a, self.p as u64 - 2))
    }

    #[inline]
    pub fn contains(&self, a: u32) -> bool {
        a < self.p
    }
}

impl TryFrom<u32> for Field {
    type Error = Error;

    fn try_from(p: u32) -> Result<Self> {
        Field::new(p)
    }
}

impl From<Field> for u32 {
    fn from(f: Field) -> u32 {
        f.p
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Dense polynomial over `F_p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    field: Field,
    coeffs: Vec<u32>,
}

impl Poly {
    /// Builds a polynomial from coefficients, reducing each into the field.
    pub fn new(field: Field, coeffs: impl IntoIterator<Item = u32>) -> Self {
        let coeffs = coeffs.into_iter().map(|c| c % field.p).collect();
        Poly { field, coeffs }
    }

    pub fn from_i64(field: Field, coeffs: &[i64]) -> Self {
        Poly {
            field,
            coeffs: coeffs.iter().map(|&c| field.reduce(c)).collect(),
        }
    }

    pub fn zero(field: Field, len: usize) -> Self {
        Poly {
            field,
            coeffs: vec![0; len],
        }
    }

    pub fn one(field: Field, len: usize) -> Self {
        Self::monomial(field, 1, 0, len)
    }

    /// `coeff * D^degree`, stored at length `len` (wrapping `degree` mod `len`).
    pub fn monomial(field: Field, coeff: u32, degree: usize, len: usize) -> Self {
        let mut p = Self::zero(field, len.max(1));
        let n = p.coeffs.len();
        p.coeffs[degree % n] = coeff % field.p;
        p
    }

    #[inline]
    pub fn field(&self) -> Field {
        self.field
    }

    #[inline]
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u32> {
        self.coeffs
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `D^k`, zero past the stored length.
    #[inline]
    pub fn coeff(&self, k: usize) -> u32 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Index of the highest nonzero coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0)
    }

    /// Folds the polynomial into `F_p[D]/(D^L - 1)`, returning length `L`.
    pub fn reduce_circ(&self, len: usize) -> Result<Poly> {
        if len == 0 {
            return Err(Error::domain("ring length L must be positive"));
        }
        let mut out = vec![0u32; len];
        for (k, &c) in self.coeffs.iter().enumerate() {
            let slot = &mut out[k % len];
            *slot = self.field.add(*slot, c);
        }
        Ok(Poly {
            field: self.field,
            coeffs: out,
        })
    }

    fn check_field(&self, other: &Poly) -> Result<()> {
        if self.field != other.field {
            return Err(Error::domain("polynomials over different fields"));
        }
        Ok(())
    }

    /// Coefficient-wise sum; the shorter operand is zero-extended.
    pub fn add(&self, other: &Poly) -> Result<Poly> {
        self.check_field(other)?;
        let n = self.len().max(other.len());
        let coeffs = (0..n)
            .map(|k| self.field.add(self.coeff(k), other.coeff(k)))
            .collect();
        Ok(Poly {
            field: self.field,
            coeffs,
        })
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly> {
        self.check_field(other)?;
        let n = self.len().max(other.len());
        let coeffs = (0..n)
            .map(|k| self.field.sub(self.coeff(k), other.coeff(k)))
            .collect();
        Ok(Poly {
            field: self.field,
            coeffs,
        })
    }

    pub fn scale(&self, s: u32) -> Poly {
        Poly {
            field: self.field,
            coeffs: self.coeffs.iter().map(|&c| self.field.mul(c, s)).collect(),
        }
    }

    /// Product modulo `D^L - 1`, i.e. length-`L` circular convolution.
    pub fn mul_circ(&self, other: &Poly, len: usize) -> Result<Poly> {
        self.check_field(other)?;
        let a = self.reduce_circ(len)?;
        let b = other.reduce_circ(len)?;
        let f = self.field;
        let mut out = vec![0u32; len];
        for (i, &ai) in a.coeffs.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.coeffs.iter().enumerate() {
                if bj == 0 {
                    continue;
                }
                let k = (i + j) % len;
                out[k] = f.add(out[k], f.mul(ai, bj));
            }
        }
        Ok(Poly {
            field: f,
            coeffs: out,
        })
    }

    /// Multiplication by `D^t` in the ring: a right circular shift by `t`.
    pub fn shift_circ(&self, t: usize) -> Poly {
        let n = self.len();
        if n == 0 {
            return self.clone();
        }
        let mut coeffs = vec![0u32; n];
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs[(k + t) % n] = c;
        }
        Poly {
            field: self.field,
            coeffs,
        }
    }
}

/// `a * b mod (D^L - 1)`.
pub fn poly_mul_circ(a: &Poly, b: &Poly, len: usize) -> Result<Poly> {
    a.mul_circ(b, len)
}

/// Rectangular matrix of polynomials sharing one field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    entries: Vec<Poly>,
}

impl PolyMatrix {
    /// Row-major constructor.
    pub fn new(field: Field, rows: usize, cols: usize, entries: Vec<Poly>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::domain(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|e| e.field != field) {
            return Err(Error::domain("matrix entries over different fields"));
        }
        Ok(PolyMatrix {
            field,
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(
        field: Field,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Poly,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(field, rows, cols, entries)
    }

    pub fn identity(field: Field, n: usize, len: usize) -> Self {
        Self::from_fn(field, n, n, |i, j| {
            if i == j {
                Poly::one(field, len)
            } else {
                Poly::zero(field, len)
            }
        })
        .expect("identity is well formed")
    }

    #[inline]
    pub fn field(&self) -> Field {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    fn require_square(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(Error::domain(format!(
                "matrix is {}x{}, not square",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    /// Matrix product with entries reduced modulo `D^L - 1`.
    pub fn mul(&self, other: &PolyMatrix, len: usize) -> Result<PolyMatrix> {
        if self.cols != other.rows {
            return Err(Error::domain("inner dimensions differ"));
        }
        if self.field != other.field {
            return Err(Error::domain("matrices over different fields"));
        }
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Poly::zero(self.field, len);
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul_circ(other.get(k, j), len)?)?;
                }
                entries.push(acc);
            }
        }
        PolyMatrix::new(self.field, self.rows, other.cols, entries)
    }

    /// Applies the matrix to a column of polynomials.
    pub fn mul_vec(&self, v: &[Poly], len: usize) -> Result<Vec<Poly>> {
        if v.len() != self.cols {
            return Err(Error::domain("vector length differs from column count"));
        }
        (0..self.rows)
            .map(|i| {
                let mut acc = Poly::zero(self.field, len);
                for (k, vk) in v.iter().enumerate() {
                    acc = acc.add(&self.get(i, k).mul_circ(vk, len)?)?;
                }
                Ok(acc)
            })
            .collect()
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> PolyMatrix {
        let mut entries = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in (0..self.rows).filter(|&i| i != skip_row) {
            for j in (0..self.cols).filter(|&j| j != skip_col) {
                entries.push(self.get(i, j).clone());
            }
        }
        PolyMatrix {
            field: self.field,
            rows: self.rows - 1,
            cols: self.cols - 1,
            entries,
        }
    }

    /// Determinant by cofactor expansion along the first row, reduced
    /// modulo `D^L - 1`. The empty matrix has determinant 1.
    pub fn det(&self, len: usize) -> Result<Poly> {
        self.require_square()?;
        match self.rows {
            0 => Ok(Poly::one(self.field, len)),
            1 => self.get(0, 0).reduce_circ(len),
            n => {
                let mut acc = Poly::zero(self.field, len);
                for j in 0..n {
                    let a = self.get(0, j);
                    if a.is_zero() {
                        continue;
                    }
                    let term = a.mul_circ(&self.minor(0, j).det(len)?, len)?;
                    acc = if j % 2 == 0 {
                        acc.add(&term)?
                    } else {
                        acc.sub(&term)?
                    };
                }
                Ok(acc)
            }
        }
    }

    /// Adjugate (transposed cofactor matrix): `adj(M) * M = det(M) * I`.
    pub fn adjugate(&self, len: usize) -> Result<PolyMatrix> {
        self.require_square()?;
        let n = self.rows;
        if n == 1 {
            return Ok(PolyMatrix::identity(self.field, 1, len));
        }
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let c = self.minor(j, i).det(len)?;
                entries.push(if (i + j) % 2 == 0 { c } else { c.scale(self.field.neg(1)) });
            }
        }
        PolyMatrix::new(self.field, n, n, entries)
    }
}

/// Solves `f = g * c mod (D^L - 1)` for the unique `c` whose last `n_frozen`
/// coefficients are zero. `L` is the length of `f`.
///
/// Substitution runs downward from the top unknown index: coefficient
/// `m + deg(g)` of `f` involves `c[m]` through the leading coefficient of `g`
/// and otherwise only higher, already known, entries of `c`. Equations not used
/// by the substitution are checked afterwards.
pub fn deconvolve_tail(f: &Poly, g: &Poly, n_frozen: usize) -> Result<Poly> {
    let c = deconvolve_tail_unchecked(f, g, n_frozen)?;
    let len = f.len();
    if g.mul_circ(&c, len)? != *f {
        return Err(Error::decode(
            "no zero-tail solution reproduces the observed polynomial",
        ));
    }
    Ok(c)
}

/// Back-substitution without the final consistency check. On inconsistent
/// input this still returns the candidate implied by the upper equations.
pub(crate) fn deconvolve_tail_unchecked(f: &Poly, g: &Poly, n_frozen: usize) -> Result<Poly> {
    if f.field != g.field {
        return Err(Error::domain("polynomials over different fields"));
    }
    let len = f.len();
    if len == 0 {
        return Err(Error::domain("empty observation"));
    }
    if n_frozen >= len {
        return Err(Error::domain(format!(
            "{n_frozen} frozen positions leave nothing to recover in length {len}"
        )));
    }
    let g = g.reduce_circ(len)?;
    let deg = g
        .degree()
        .ok_or_else(|| Error::domain("deconvolution by the zero polynomial"))?;
    if deg > n_frozen {
        return Err(Error::domain(format!(
            "filter degree {deg} exceeds the {n_frozen} frozen positions"
        )));
    }
    let field = f.field;
    if f.is_zero() {
        return Ok(Poly::zero(field, len));
    }
    let lead_inv = field.inv(g.coeffs[deg])?;
    let mut c = vec![0u32; len];
    for m in (0..len - n_frozen).rev() {
        // f[m + deg] = g[deg] c[m] + sum_{j < deg} g[j] c[m + deg - j]
        let mut acc = f.coeffs[m + deg];
        for j in 0..deg {
            let gj = g.coeffs[j];
            if gj != 0 {
                acc = field.sub(acc, field.mul(gj, c[m + deg - j]));
            }
        }
        c[m] = field.mul(acc, lead_inv);
    }
    Ok(Poly { field, coeffs: c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf2() -> Field {
        Field::binary()
    }

    /// Schoolbook linear product followed by folding `D^k -> D^(k mod L)`.
    fn linear_then_fold(a: &[u32], b: &[u32], len: usize, p: u32) -> Vec<u32> {
        let mut lin = vec![0u64; a.len() + b.len()];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                lin[i + j] += x as u64 * y as u64;
            }
        }
        let mut out = vec![0u64; len];
        for (k, v) in lin.into_iter().enumerate() {
            out[k % len] += v;
        }
        out.into_iter().map(|v| (v % p as u64) as u32).collect()
    }

    #[test]
    fn field_examples() {
        let f5 = Field::new(5).unwrap();
        assert_eq!(f5.add(3, 4), 2);
        assert_eq!(f5.inv(2).unwrap(), 3);
        assert_eq!(gf2().add(1, 1), 0);
        assert_eq!(f5.neg(2), 3);
        assert_eq!(f5.mul(4, 4), 1);
        assert!(matches!(f5.inv(0), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_composite_modulus() {
        assert!(Field::new(4).is_err());
        assert!(Field::new(1).is_err());
        assert!(Field::new(7).is_ok());
    }

    #[test]
    fn inverse_is_inverse() {
        for p in [2u32, 3, 5, 7, 11, 13] {
            let f = Field::new(p).unwrap();
            for a in 1..p {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }
    }

    #[test]
    fn circular_product_examples() {
        let a = Poly::new(gf2(), [1, 1]);
        let b = Poly::new(gf2(), [1, 1, 0, 1]);
        let expected = linear_then_fold(a.coeffs(), b.coeffs(), 4, 2);
        assert_eq!(expected, vec![0, 0, 1, 1]);
        assert_eq!(poly_mul_circ(&a, &b, 4).unwrap().coeffs(), &expected[..]);

        let d = Poly::monomial(gf2(), 1, 1, 4);
        let d3 = Poly::monomial(gf2(), 1, 3, 4);
        assert_eq!(d.mul_circ(&d3, 4).unwrap(), Poly::one(gf2(), 4));

        let one = Poly::one(gf2(), 4);
        assert_eq!(b.mul_circ(&one, 4).unwrap(), b);
        assert!(matches!(a.mul_circ(&b, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn shift_matches_monomial_product() {
        let f7 = Field::new(7).unwrap();
        let a = Poly::new(f7, [3, 0, 5, 1, 6]);
        let d2 = Poly::monomial(f7, 1, 2, 5);
        assert_eq!(a.shift_circ(2), a.mul_circ(&d2, 5).unwrap());
    }

    fn example_matrix(len: usize) -> PolyMatrix {
        let f = gf2();
        PolyMatrix::new(
            f,
            2,
            2,
            vec![
                Poly::monomial(f, 1, 1, len),
                Poly::one(f, len),
                Poly::one(f, len),
                Poly::monomial(f, 1, 1, len),
            ],
        )
        .unwrap()
    }

    #[test]
    fn two_by_two_delay_matrix() {
        let len = 8;
        let m = example_matrix(len);
        assert_eq!(m.det(len).unwrap(), Poly::new(gf2(), [1, 0, 1, 0, 0, 0, 0, 0]));
        assert_eq!(m.adjugate(len).unwrap(), m);
    }

    #[test]
    fn determinant_edge_cases() {
        let f5 = Field::new(5).unwrap();
        let len = 6;
        assert_eq!(
            PolyMatrix::identity(f5, 3, len).det(len).unwrap(),
            Poly::one(f5, len)
        );
        let row = [
            Poly::new(f5, [1, 2]),
            Poly::new(f5, [0, 4, 1]),
            Poly::new(f5, [3]),
        ];
        let entries: Vec<Poly> = row
            .iter()
            .chain(row.iter())
            .cloned()
            .chain([Poly::one(f5, 1), Poly::zero(f5, 1), Poly::new(f5, [2, 2])])
            .collect();
        let m = PolyMatrix::new(f5, 3, 3, entries).unwrap();
        assert!(m.det(len).unwrap().is_zero());

        let rect = PolyMatrix::from_fn(f5, 2, 3, |_, _| Poly::one(f5, 1)).unwrap();
        assert!(matches!(rect.det(len), Err(Error::Domain(_))));
        assert!(matches!(rect.adjugate(len), Err(Error::Domain(_))));
    }

    #[test]
    fn adjugate_of_scalar_is_one() {
        let f5 = Field::new(5).unwrap();
        let m = PolyMatrix::new(f5, 1, 1, vec![Poly::new(f5, [2, 3])]).unwrap();
        assert_eq!(m.adjugate(4).unwrap(), PolyMatrix::identity(f5, 1, 4));
    }

    fn random_matrix(rng: &mut ChaCha8Rng, field: Field, n: usize) -> PolyMatrix {
        PolyMatrix::from_fn(field, n, n, |_, _| {
            Poly::new(field, (0..3).map(|_| rng.gen_range(0..field.p())))
        })
        .unwrap()
    }

    #[test]
    fn adjugate_identity_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let len = 7;
        for trial in 0..1200 {
            let field = if trial % 2 == 0 {
                gf2()
            } else {
                Field::new(5).unwrap()
            };
            let n = 1 + trial % 3;
            let m = random_matrix(&mut rng, field, n);
            let lhs = m.adjugate(len).unwrap().mul(&m, len).unwrap();
            let det = m.det(len).unwrap();
            let rhs = PolyMatrix::from_fn(field, n, n, |i, j| {
                if i == j {
                    det.clone()
                } else {
                    Poly::zero(field, len)
                }
            })
            .unwrap();
            assert_eq!(lhs, rhs, "trial {trial}");
        }
    }

    #[test]
    fn deconvolution_examples() {
        let f = Poly::new(gf2(), [1, 0, 0, 1, 1, 0, 0, 1]);
        let g = Poly::new(gf2(), [1, 0, 1]);
        let c = deconvolve_tail(&f, &g, 2).unwrap();
        assert_eq!(c.coeffs(), &[1, 0, 1, 1, 0, 1, 0, 0]);
        // forward oracle
        assert_eq!(
            linear_then_fold(c.coeffs(), g.coeffs(), 8, 2),
            f.coeffs().to_vec()
        );

        let f7 = Field::new(7).unwrap();
        let x = Poly::new(f7, [3, 1, 4, 1, 5, 0]);
        assert_eq!(deconvolve_tail(&x, &Poly::one(f7, 1), 1).unwrap(), x);
        assert!(deconvolve_tail(&Poly::zero(f7, 6), &Poly::new(f7, [1, 2]), 1)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn deconvolution_errors() {
        let f = Poly::new(gf2(), [1, 0, 0, 1, 1, 0, 0, 1]);
        assert!(matches!(
            deconvolve_tail(&f, &Poly::zero(gf2(), 3), 2),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            deconvolve_tail(&f, &Poly::new(gf2(), [1, 0, 0, 1]), 2),
            Err(Error::Domain(_))
        ));
        // Flip one coefficient: the lower equations no longer agree.
        let mut bad = f.coeffs().to_vec();
        bad[0] ^= 1;
        assert!(matches!(
            deconvolve_tail(&Poly::new(gf2(), bad), &Poly::new(gf2(), [1, 0, 1]), 2),
            Err(Error::DecodeFailure(_))
        ));
    }

    #[test]
    fn deconvolution_with_low_order_zeros() {
        // g = D^2 (1 + D): pure delay composed with the dicode response.
        let f5 = Field::new(5).unwrap();
        let g = Poly::new(f5, [0, 0, 1, 1]);
        let c = Poly::new(f5, [4, 1, 0, 3, 2, 0, 0, 0, 0]);
        let f = g.mul_circ(&c, 9).unwrap();
        assert_eq!(deconvolve_tail(&f, &g, 3).unwrap(), c);
    }

    fn arb_field() -> impl Strategy<Value = Field> {
        prop_oneof![Just(2u32), Just(3u32), Just(5u32), Just(7u32)]
            .prop_map(|p| Field::new(p).unwrap())
    }

    proptest! {
        #[test]
        fn circular_product_commutes_and_distributes(
            field in arb_field(),
            len in 1usize..12,
            raw in proptest::collection::vec((0u32..7, 0u32..7, 0u32..7), 1..12),
        ) {
            let a = Poly::new(field, raw.iter().map(|t| t.0));
            let b = Poly::new(field, raw.iter().map(|t| t.1));
            let c = Poly::new(field, raw.iter().map(|t| t.2));
            let ab = a.mul_circ(&b, len).unwrap();
            prop_assert_eq!(&ab, &b.mul_circ(&a, len).unwrap());
            let lhs = a.mul_circ(&b.add(&c).unwrap(), len).unwrap();
            let rhs = ab.add(&a.mul_circ(&c, len).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(
                ab.coeffs().to_vec(),
                linear_then_fold(a.coeffs(), b.coeffs(), len, field.p())
            );
        }

        #[test]
        fn deconvolution_round_trip(
            field in arb_field(),
            len in 4usize..24,
            frozen_frac in 0.0f64..0.5,
            gseed in proptest::collection::vec(0u32..7, 1..6),
            cseed in proptest::collection::vec(0u32..7, 24),
        ) {
            let n_frozen = ((len as f64 * frozen_frac) as usize).max(gseed.len() - 1);
            prop_assume!(n_frozen < len);
            let g = Poly::new(field, gseed.iter().copied());
            prop_assume!(!g.is_zero());
            let c = Poly::new(
                field,
                (0..len).map(|k| if k < len - n_frozen { cseed[k] } else { 0 }),
            );
            let f = g.mul_circ(&c, len).unwrap();
            prop_assert_eq!(deconvolve_tail(&f, &g, n_frozen).unwrap(), c);
        }
    }
}
