//! Quasi-cyclic LDPC codes built by circulant expansion of a protograph.
//!
//! Codewords are held in the *shift* representation: circularly shifting a
//! codeword by any multiple of `b` yields another codeword. The parity-check
//! matrix is assembled in *block* form (b block-columns of width `L`) and its
//! columns are permuted so that block-column `j`, offset `k` lands at codeword
//! position `k*b + j`. Interleaving a codeword therefore recovers its block
//! form, and the message occupies the first `K` positions of that block form.

mod bp;

pub use bp::{bp_decode, DecodeResult, Evidence, GroupBp};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galois::Field;
use crate::linalg::RowMatrix;

/// Resampling budget for random circulant shifts.
pub const MAX_SHIFT_RESAMPLES: usize = 100;

/// A `{0,1}` protomatrix with `rows` check rows and `cols` block-columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Protograph {
    rows: usize,
    cols: usize,
    entries: Vec<bool>,
}

impl Protograph {
    pub fn new(entries: &[Vec<u8>]) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::domain("empty protomatrix"));
        }
        if entries.iter().any(|r| r.len() != cols) {
            return Err(Error::domain("ragged protomatrix"));
        }
        if rows >= cols {
            return Err(Error::domain(format!(
                "protomatrix needs fewer rows than columns, got {rows}x{cols}"
            )));
        }
        let mut flat = Vec::with_capacity(rows * cols);
        for row in entries {
            for &v in row {
                match v {
                    0 => flat.push(false),
                    1 => flat.push(true),
                    _ => return Err(Error::domain(format!("protomatrix entry {v} not in {{0,1}}"))),
                }
            }
        }
        let proto = Protograph {
            rows,
            cols,
            entries: flat,
        };
        if let Some(j) = (0..cols).find(|&j| (0..rows).all(|i| !proto.get(i, j))) {
            return Err(Error::domain(format!("protomatrix column {j} is all zero")));
        }
        Ok(proto)
    }

    /// Repeat-accumulate style protomatrix: the `cols - rows` message columns
    /// have weight `min(3, rows)` spread evenly over the rows. With three or
    /// more rows the parity columns form a dual-diagonal staircase whose first
    /// column has weight three, so the parity part is invertible at `D = 1`.
    /// Smaller protomatrices use a lower bidiagonal parity part, which is
    /// invertible for every choice of shifts.
    pub fn staircase(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || rows >= cols {
            return Err(Error::domain(format!(
                "staircase protomatrix needs 0 < rows < cols, got {rows}x{cols}"
            )));
        }
        let mut m = vec![vec![0u8; cols]; rows];
        let msg_cols = cols - rows;
        let weight = rows.min(3);
        let step = (rows / weight).max(1);
        for j in 0..msg_cols {
            for t in 0..weight {
                m[(j + t * step) % rows][j] = 1;
            }
        }
        for t in 0..rows {
            let j = msg_cols + t;
            if rows < 3 {
                m[t][j] = 1;
                if t + 1 < rows {
                    m[t + 1][j] = 1;
                }
            } else if t == 0 {
                m[0][j] = 1;
                m[rows / 2][j] = 1;
                m[rows - 1][j] = 1;
            } else {
                m[t - 1][j] = 1;
                m[t][j] = 1;
            }
        }
        Protograph::new(&m)
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
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.cols + j]
    }

    /// Block-columns carrying message symbols.
    #[inline]
    pub fn message_cols(&self) -> usize {
        self.cols - self.rows
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) as u8).collect())
            .collect()
    }

    fn nonzero_entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |i| (0..self.cols).filter(move |&j| self.get(i, j)).map(move |j| (i, j)))
    }
}

/// Serialized code: enough to rebuild the parity-check matrix bit-exactly.
/// `shifts[i][j]` is the circulant offset of protomatrix entry `(i, j)` and is
/// ignored where the protomatrix is zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeDescription {
    pub p: u32,
    pub b: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub protomatrix: Vec<Vec<u8>>,
    pub shifts: Vec<Vec<usize>>,
}

/// Parameters for drawing a random staircase code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeParams {
    #[serde(default = "default_p")]
    pub p: u32,
    /// Shifting constraint, the number of block-columns.
    pub b: usize,
    /// Protomatrix check rows; the design rate is `1 - check_rows / b`.
    pub check_rows: usize,
    /// Circulant size.
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_p() -> u32 {
    2
}

impl CodeParams {
    pub fn build(&self) -> Result<QcCode> {
        use rand::SeedableRng;
        let field = Field::new(self.p)?;
        let proto = Protograph::staircase(self.check_rows, self.b)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed);
        QcCode::random(field, proto, self.l, &mut rng)
    }
}

/// Variable/check adjacency with edges numbered check by check.
#[derive(Clone, Debug)]
pub(crate) struct TannerGraph {
    pub check_start: Vec<usize>,
    pub edge_var: Vec<usize>,
    pub var_edges: Vec<Vec<usize>>,
}

impl TannerGraph {
    fn new(checks: &[Vec<usize>], n_vars: usize) -> Self {
        let mut check_start = Vec::with_capacity(checks.len() + 1);
        let mut edge_var = Vec::new();
        let mut var_edges = vec![Vec::new(); n_vars];
        check_start.push(0);
        for nbrs in checks {
            for &v in nbrs {
                var_edges[v].push(edge_var.len());
                edge_var.push(v);
            }
            check_start.push(edge_var.len());
        }
        TannerGraph {
            check_start,
            edge_var,
            var_edges,
        }
    }

    #[inline]
    pub fn n_checks(&self) -> usize {
        self.check_start.len() - 1
    }

    #[inline]
    pub fn n_edges(&self) -> usize {
        self.edge_var.len()
    }

    #[inline]
    pub fn check_edges(&self, c: usize) -> std::ops::Range<usize> {
        self.check_start[c]..self.check_start[c + 1]
    }
}

/// A b-QC LDPC code over `F_p`.
#[derive(Clone, Debug)]
pub struct QcCode {
    field: Field,
    proto: Protograph,
    circulant: usize,
    shifts: Vec<Vec<usize>>,
    dimension: usize,
    checks: Vec<Vec<usize>>,
    graph: TannerGraph,
    /// `[I | X]` with `X = H_p^{-1} H_m` in block-form columns, parity first.
    generator: Option<RowMatrix>,
}

impl QcCode {
    /// Replaces each protomatrix one by an `L x L` circulant permutation with
    /// the given offset and each zero by an all-zero block. The dimension is
    /// taken from the rank of the assembled matrix. No generator is attached.
    pub fn expand(field: Field, proto: Protograph, circulant: usize, shifts: Vec<Vec<usize>>) -> Result<Self> {
        if circulant == 0 {
            return Err(Error::domain("circulant size must be positive"));
        }
        if shifts.len() != proto.rows || shifts.iter().any(|r| r.len() != proto.cols) {
            return Err(Error::domain("shift matrix shape differs from the protomatrix"));
        }
        let mut shifts = shifts;
        for i in 0..proto.rows {
            for j in 0..proto.cols {
                if !proto.get(i, j) {
                    shifts[i][j] = 0;
                } else if shifts[i][j] >= circulant {
                    return Err(Error::domain(format!(
                        "shift {} at ({i},{j}) out of range for L = {circulant}",
                        shifts[i][j]
                    )));
                }
            }
        }
        let b = proto.cols;
        let n = b * circulant;
        let mut checks = Vec::with_capacity(proto.rows * circulant);
        for i in 0..proto.rows {
            for r in 0..circulant {
                let nbrs: Vec<usize> = (0..b)
                    .filter(|&j| proto.get(i, j))
                    .map(|j| ((r + shifts[i][j]) % circulant) * b + j)
                    .collect();
                checks.push(nbrs);
            }
        }
        let graph = TannerGraph::new(&checks, n);
        let mut code = QcCode {
            field,
            proto,
            circulant,
            shifts,
            dimension: 0,
            checks,
            graph,
            generator: None,
        };
        let mut h = code.block_form_rows(0);
        let rank = h.reduce(n);
        code.dimension = n - rank;
        Ok(code)
    }

    /// Attaches a systematic encoder whose message fills the first
    /// `message_cols * L` block-form positions. Fails when the parity
    /// block-columns do not form an invertible submatrix.
    pub fn with_systematic_generator(mut self) -> Result<Self> {
        let parity = self.proto.rows * self.circulant;
        let mut aug = self.block_form_rows(self.proto.message_cols());
        if aug.reduce(parity) < parity {
            return Err(Error::construction("parity block-columns are singular"));
        }
        self.generator = Some(aug);
        Ok(self)
    }

    /// Draws circulant offsets at random (avoiding length-4 cycles where the
    /// circulant size allows it) until the parity part is invertible.
    pub fn random<R: Rng + ?Sized>(field: Field, proto: Protograph, circulant: usize, rng: &mut R) -> Result<Self> {
        if circulant == 0 {
            return Err(Error::domain("circulant size must be positive"));
        }
        for _ in 0..MAX_SHIFT_RESAMPLES {
            let shifts = sample_shifts(&proto, circulant, rng);
            match QcCode::expand(field, proto.clone(), circulant, shifts)?.with_systematic_generator() {
                Ok(code) => return Ok(code),
                Err(Error::Construction(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::construction(format!(
            "no invertible parity part after {MAX_SHIFT_RESAMPLES} shift draws"
        )))
    }

    pub fn from_description(desc: &CodeDescription) -> Result<Self> {
        let field = Field::new(desc.p)?;
        let proto = Protograph::new(&desc.protomatrix)?;
        if proto.cols != desc.b {
            return Err(Error::domain(format!(
                "protomatrix has {} columns but b = {}",
                proto.cols, desc.b
            )));
        }
        QcCode::expand(field, proto, desc.l, desc.shifts.clone())?.with_systematic_generator()
    }

    pub fn description(&self) -> CodeDescription {
        CodeDescription {
            p: self.field.p(),
            b: self.b(),
            l: self.circulant,
            protomatrix: self.proto.to_rows(),
            shifts: self.shifts.clone(),
        }
    }

    /// Block-form parity-check rows, columns reordered so that the parity
    /// block-columns come first when `message_cols > 0`:
    /// `[H_p | H_m]`. With `message_cols == 0` the natural order is kept.
    fn block_form_rows(&self, message_cols: usize) -> RowMatrix {
        let l = self.circulant;
        let b = self.b();
        let mut m = RowMatrix::zeros(self.field, self.proto.rows * l, b * l);
        for (i, j) in self.proto.nonzero_entries() {
            let col_block = if message_cols == 0 {
                j
            } else if j >= message_cols {
                j - message_cols
            } else {
                b - message_cols + j
            };
            for r in 0..l {
                let k = (r + self.shifts[i][j]) % l;
                m.accumulate(i * l + r, col_block * l + k, 1);
            }
        }
        m
    }

    #[inline]
    pub fn field(&self) -> Field {
        self.field
    }

    #[inline]
    pub fn protograph(&self) -> &Protograph {
        &self.proto
    }

    /// Shifting constraint `b`.
    #[inline]
    pub fn b(&self) -> usize {
        self.proto.cols
    }

    /// Circulant (sub-block) size `L`.
    #[inline]
    pub fn circulant(&self) -> usize {
        self.circulant
    }

    /// Code length `N' = b L`.
    #[inline]
    pub fn n(&self) -> usize {
        self.b() * self.circulant
    }

    /// Code dimension from the rank of `H`.
    #[inline]
    pub fn k(&self) -> usize {
        self.dimension
    }

    /// Number of message sub-blocks `r_d b`.
    #[inline]
    pub fn message_blocks(&self) -> usize {
        self.proto.message_cols()
    }

    pub fn design_rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    pub fn shifts(&self) -> &[Vec<usize>] {
        &self.shifts
    }

    /// Check neighbourhoods in codeword coordinates.
    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    pub(crate) fn graph(&self) -> &TannerGraph {
        &self.graph
    }

    pub fn has_generator(&self) -> bool {
        self.generator.is_some()
    }

    /// Codeword position of block-form position `s*L + k`.
    #[inline]
    pub fn block_to_codeword(&self, block_pos: usize) -> usize {
        let (s, k) = (block_pos / self.circulant, block_pos % self.circulant);
        k * self.b() + s
    }

    /// Systematic encoding. The message appears verbatim in the first `K`
    /// block-form positions, i.e. in the first `r_d b` sub-blocks after
    /// interleaving.
    pub fn encode(&self, w: &[u32]) -> Result<Vec<u32>> {
        let gen = self
            .generator
            .as_ref()
            .ok_or_else(|| Error::domain("code has no systematic generator"))?;
        let k = self.message_blocks() * self.circulant;
        if w.len() != k {
            return Err(Error::domain(format!("message length {} but K = {k}", w.len())));
        }
        if let Some(&bad) = w.iter().find(|&&x| !self.field.contains(x)) {
            return Err(Error::domain(format!("message symbol {bad} outside F_{}", self.field.p())));
        }
        let parity = self.proto.rows * self.circulant;
        let mut c = vec![0u32; self.n()];
        for (pos, &x) in w.iter().enumerate() {
            c[self.block_to_codeword(pos)] = x;
        }
        for i in 0..parity {
            let v = self.field.neg(gen.row_dot(i, parity, w, self.field));
            c[self.block_to_codeword(k + i)] = v;
        }
        Ok(c)
    }

    /// Reads the systematic part back out of a codeword.
    pub fn extract_message(&self, c: &[u32]) -> Vec<u32> {
        let k = self.message_blocks() * self.circulant;
        (0..k).map(|pos| c[self.block_to_codeword(pos)]).collect()
    }

    /// `H c = 0`.
    pub fn is_codeword(&self, c: &[u32]) -> bool {
        c.len() == self.n() && self.checks.iter().all(|nbrs| self.check_sum(nbrs, c, 0) == 0)
    }

    fn check_sum(&self, nbrs: &[usize], c: &[u32], shift: usize) -> u32 {
        let n = self.n();
        let p = self.field.p() as u64;
        let s: u64 = nbrs.iter().map(|&v| c[(v + n - shift % n) % n] as u64).sum();
        (s % p) as u32
    }

    /// True iff every circular shift of `c` by a multiple of `b` satisfies
    /// all parity checks.
    pub fn verify_qc_closure(&self, c: &[u32]) -> bool {
        if c.len() != self.n() {
            return false;
        }
        let b = self.b();
        (0..self.circulant).all(|i| self.checks.iter().all(|nbrs| self.check_sum(nbrs, c, b * i) == 0))
    }

    /// Dense block-form parity-check matrix (`cL x N'`), for small codes.
    pub fn parity_check_block_form(&self) -> Vec<Vec<u32>> {
        let m = self.block_form_rows(0);
        (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m.get(r, c)).collect()).collect()
    }

    /// Dense `K x N'` generator in codeword coordinates, for small codes.
    pub fn generator_matrix(&self) -> Result<Vec<Vec<u32>>> {
        let k = self.message_blocks() * self.circulant;
        (0..k)
            .map(|j| {
                let mut w = vec![0u32; k];
                w[j] = 1;
                self.encode(&w)
            })
            .collect()
    }
}

fn sample_shifts<R: Rng + ?Sized>(proto: &Protograph, circulant: usize, rng: &mut R) -> Vec<Vec<usize>> {
    const TRIES: usize = 32;
    let mut shifts = vec![vec![0usize; proto.cols]; proto.rows];
    let l = circulant as i64;
    for (i, j) in proto.nonzero_entries() {
        let mut pick = rng.gen_range(0..circulant);
        for _ in 0..TRIES {
            let s = pick as i64;
            let four_cycle = (0..i).any(|i2| {
                proto.get(i2, j)
                    && (0..j).any(|j2| {
                        proto.get(i, j2)
                            && proto.get(i2, j2)
                            && (s - shifts[i][j2] as i64 + shifts[i2][j2] as i64 - shifts[i2][j] as i64)
                                .rem_euclid(l)
                                == 0
                    })
            });
            if !four_cycle {
                break;
            }
            pick = rng.gen_range(0..circulant);
        }
        shifts[i][j] = pick;
    }
    shifts
}
