//! Exact linear algebra: fraction-free elimination over the rationals and
//! dense elimination over word-sized prime fields.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::polyring::PrimeField;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinearSystemError {
    #[error("linear system is inconsistent (first violated equation: {0})")]
    Inconsistent(usize),
    #[error("linear system has a {0}-dimensional solution space")]
    Underdetermined(usize),
    #[error("row {row} has {got} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, got: usize },
}

/// Scales each row by the lcm of its denominators, giving an integer matrix
/// with the same row space.
fn clear_denominators(rows: &[Vec<BigRational>]) -> (Vec<Vec<BigInt>>, BigInt) {
    let mut scale_product = BigInt::one();
    let ints = rows
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            scale_product *= &l;
            row.iter().map(|x| x.numer() * (&l / x.denom())).collect()
        })
        .collect();
    (ints, scale_product)
}

/// Bareiss elimination in place. Returns the rank and the sign of the row
/// permutation used; on return the last pivot equals the determinant of the
/// leading pivot minor.
fn bareiss(a: &mut [Vec<BigInt>]) -> (usize, bool, Option<BigInt>) {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut rank = 0;
    let mut flipped = false;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        if p != rank {
            a.swap(p, rank);
            flipped = !flipped;
        }
        let (top, bottom) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in bottom.iter_mut() {
            for j in c + 1..cols {
                let v = &pivot_row[c] * &row[j] - &row[c] * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = pivot_row[c].clone();
        rank += 1;
    }
    (rank, flipped, (rank > 0).then_some(prev))
}

/// Exact rank of a rational matrix.
pub fn rank_rational(rows: &[Vec<BigRational>]) -> usize {
    let (mut ints, _) = clear_denominators(rows);
    bareiss(&mut ints).0
}

/// Exact determinant of a square rational matrix.
pub fn determinant_rational(rows: &[Vec<BigRational>]) -> BigRational {
    let n = rows.len();
    assert!(rows.iter().all(|r| r.len() == n), "determinant of a non-square matrix");
    if n == 0 {
        return BigRational::one();
    }
    let (mut ints, scale) = clear_denominators(rows);
    let (rank, flipped, last) = bareiss(&mut ints);
    if rank < n {
        return BigRational::zero();
    }
    let det = last.expect("full rank has a pivot");
    let det = if flipped { -det } else { det };
    BigRational::new(det, scale)
}

/// Unique solution of `A x = b` over the rationals.
pub fn solve_rational(a: &[Vec<BigRational>], b: &[BigRational]) -> Result<Vec<BigRational>, LinearSystemError> {
    let unknowns = a.first().map_or(0, Vec::len);
    // Augmented rows tagged with their original equation index.
    let mut m: Vec<(usize, Vec<BigRational>)> = Vec::with_capacity(a.len());
    for (i, (row, rhs)) in a.iter().zip(b).enumerate() {
        if row.len() != unknowns {
            return Err(LinearSystemError::Ragged { row: i, expected: unknowns, got: row.len() });
        }
        let mut r = row.clone();
        r.push(rhs.clone());
        m.push((i, r));
    }
    let mut pivot_cols = Vec::new();
    let mut rank = 0;
    for c in 0..unknowns {
        let Some(p) = (rank..m.len()).find(|&r| !m[r].1[c].is_zero()) else {
            continue;
        };
        m.swap(p, rank);
        let inv = m[rank].1[c].recip();
        for x in m[rank].1.iter_mut() {
            *x *= &inv;
        }
        let pivot = m[rank].1.clone();
        for (r, (_, row)) in m.iter_mut().enumerate() {
            if r == rank || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot) {
                *x -= &f * p;
            }
        }
        pivot_cols.push(c);
        rank += 1;
    }
    if let Some((orig, _)) = m[rank..].iter().find(|(_, row)| !row[unknowns].is_zero()) {
        return Err(LinearSystemError::Inconsistent(*orig));
    }
    if rank < unknowns {
        return Err(LinearSystemError::Underdetermined(unknowns - rank));
    }
    let mut x = vec![BigRational::zero(); unknowns];
    for (r, &c) in pivot_cols.iter().enumerate() {
        x[c] = m[r].1[unknowns].clone();
    }
    Ok(x)
}

/// Largest absolute entry of a rational vector (zero when empty).
pub fn max_abs(values: impl IntoIterator<Item = BigRational>) -> BigRational {
    values.into_iter().map(|v| v.abs()).max().unwrap_or_else(BigRational::zero)
}

/// Dense row-major matrix over a prime field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl ModMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ModMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        ModMatrix { rows: rows.len(), cols, data: rows.concat() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Rank by Gaussian elimination; consumes the matrix.
    ///
    /// Entries must be reduced residues. Row updates below each pivot run in
    /// parallel when the remaining block is large.
    pub fn rank(mut self, field: &PrimeField) -> usize {
        const PAR_THRESHOLD: usize = 1 << 16;
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        for c in 0..cols {
            if rank == rows {
                break;
            }
            let Some(p) = (rank..rows).find(|&r| self.data[r * cols + c] != 0) else {
                continue;
            };
            if p != rank {
                for j in c..cols {
                    self.data.swap(p * cols + j, rank * cols + j);
                }
            }
            let (head, tail) = self.data.split_at_mut((rank + 1) * cols);
            let pivot_row = &head[rank * cols..];
            let inv = field.inv_mod(pivot_row[c]).expect("pivot is nonzero");
            let pivot_tail = &pivot_row[c + 1..];
            let q = field.modulus();
            let eliminate = |row: &mut [u64]| {
                let a = row[c];
                if a == 0 {
                    return;
                }
                row[c] = 0;
                // Shoup: with f' = floor(f 2^64 / q), f*y - floor(f' y / 2^64) q lies in [0, 2q)
                let f = field.mul_mod(a, inv);
                let f_shoup = (((f as u128) << 64) / q as u128) as u64;
                for (x, &y) in row[c + 1..].iter_mut().zip(pivot_tail) {
                    let hi = ((f_shoup as u128 * y as u128) >> 64) as u64;
                    let r = f.wrapping_mul(y).wrapping_sub(hi.wrapping_mul(q));
                    let r = r.min(r.wrapping_sub(q));
                    let t = x.wrapping_sub(r);
                    *x = t.min(t.wrapping_add(q));
                }
            };
            if tail.len() * (cols - c) / cols.max(1) >= PAR_THRESHOLD {
                tail.par_chunks_mut(cols).for_each(eliminate);
            } else {
                tail.chunks_mut(cols).for_each(eliminate);
            }
            rank += 1;
        }
        rank
    }
}
