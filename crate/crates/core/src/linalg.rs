//! Row reduction over `F_p`, with a bit-packed path for `F_2`.

use crate::galois::Field;

/// Dense row-major matrix over a prime field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum RowMatrix {
    Binary { cols: usize, rows: Vec<Vec<u64>> },
    General { field: Field, rows: Vec<Vec<u32>> },
}

impl RowMatrix {
    pub fn zeros(field: Field, nrows: usize, ncols: usize) -> Self {
        if field.p() == 2 {
            RowMatrix::Binary {
                cols: ncols,
                rows: vec![vec![0u64; ncols.div_ceil(64)]; nrows],
            }
        } else {
            RowMatrix::General {
                field,
                rows: vec![vec![0u32; ncols]; nrows],
            }
        }
    }

    pub fn nrows(&self) -> usize {
        match self {
            RowMatrix::Binary { rows, .. } => rows.len(),
            RowMatrix::General { rows, .. } => rows.len(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            RowMatrix::Binary { cols, .. } => *cols,
            RowMatrix::General { rows, .. } => rows.first().map_or(0, Vec::len),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        match self {
            RowMatrix::Binary { rows, .. } => ((rows[r][c / 64] >> (c % 64)) & 1) as u32,
            RowMatrix::General { rows, .. } => rows[r][c],
        }
    }

    /// Adds `v` to entry `(r, c)`.
    pub fn accumulate(&mut self, r: usize, c: usize, v: u32) {
        match self {
            RowMatrix::Binary { rows, .. } => {
                if v & 1 == 1 {
                    rows[r][c / 64] ^= 1u64 << (c % 64);
                }
            }
            RowMatrix::General { field, rows } => {
                rows[r][c] = field.add(rows[r][c], v % field.p());
            }
        }
    }

    /// Gauss-Jordan elimination restricted to pivots in `0..pivot_cols`.
    /// Returns the rank. When the leading block has full column rank, row
    /// `i < pivot_cols` ends with its pivot in column `i`.
    pub fn reduce(&mut self, pivot_cols: usize) -> usize {
        match self {
            RowMatrix::Binary { rows, .. } => reduce_binary(rows, pivot_cols),
            RowMatrix::General { field, rows } => reduce_general(*field, rows, pivot_cols),
        }
    }

    /// Dot product of row `r`, restricted to columns `offset..offset+v.len()`,
    /// with `v`.
    pub fn row_dot(&self, r: usize, offset: usize, v: &[u32], field: Field) -> u32 {
        match self {
            RowMatrix::Binary { rows, .. } => {
                let row = &rows[r];
                let mut acc = 0u32;
                for (j, &x) in v.iter().enumerate() {
                    if x & 1 == 1 {
                        let c = offset + j;
                        acc ^= ((row[c / 64] >> (c % 64)) & 1) as u32;
                    }
                }
                acc
            }
            RowMatrix::General { rows, .. } => {
                let row = &rows[r][offset..offset + v.len()];
                let p = field.p() as u64;
                let acc = row
                    .iter()
                    .zip(v)
                    .fold(0u64, |acc, (&a, &x)| (acc + a as u64 * x as u64) % p);
                acc as u32
            }
        }
    }
}

fn reduce_binary(rows: &mut [Vec<u64>], pivot_cols: usize) -> usize {
    let mut rank = 0;
    for col in 0..pivot_cols {
        let (w, bit) = (col / 64, 1u64 << (col % 64));
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & bit != 0 {
                for (a, b) in row.iter_mut().zip(&pivot_row).skip(w) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

fn reduce_general(field: Field, rows: &mut [Vec<u32>], pivot_cols: usize) -> usize {
    let mut rank = 0;
    for col in 0..pivot_cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = field.inv(rows[rank][col]).expect("pivot is nonzero");
        for x in rows[rank].iter_mut().skip(col) {
            *x = field.mul(*x, inv);
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            let factor = row[col];
            if r != rank && factor != 0 {
                for (a, &b) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *a = field.sub(*a, field.mul(factor, b));
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}
