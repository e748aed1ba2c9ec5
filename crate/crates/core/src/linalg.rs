//! Exact dense linear algebra over the rationals.

use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::ratpoly::Rational;

/// Row-major dense matrix.
pub type Matrix = Vec<Vec<Rational>>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("right-hand side has length {found}, expected {expected}")]
    RhsLength { expected: usize, found: usize },
    #[error("system is singular")]
    Singular,
}

fn check_square(a: &[Vec<Rational>]) -> Result<usize, LinalgError> {
    let n = a.len();
    match a.iter().find(|row| row.len() != n) {
        Some(row) => Err(LinalgError::NotSquare { rows: n, cols: row.len() }),
        None => Ok(n),
    }
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn determinant(a: &[Vec<Rational>]) -> Result<Rational, LinalgError> {
    let n = check_square(a)?;
    if n == 0 {
        return Ok(Rational::one());
    }
    let mut m: Matrix = a.to_vec();
    let mut sign = Rational::one();
    let mut prev = Rational::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(Rational::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
            m[i][k] = Rational::zero();
        }
        prev = m[k][k].clone();
    }
    Ok(sign * &m[n - 1][n - 1])
}

/// Solves `a x = v` exactly by Gauss-Jordan elimination with first-nonzero
/// pivoting.
pub fn solve(a: &[Vec<Rational>], v: &[Rational]) -> Result<Vec<Rational>, LinalgError> {
    let n = check_square(a)?;
    if v.len() != n {
        return Err(LinalgError::RhsLength { expected: n, found: v.len() });
    }
    let mut m: Matrix = a
        .iter()
        .zip(v)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero()).ok_or(LinalgError::Singular)?;
        m.swap(col, pivot);
        let inv = m[col][col].recip();
        for x in m[col].iter_mut().skip(col) {
            *x *= &inv;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x -= &f * p;
            }
        }
    }
    Ok(m.into_iter().map(|mut row| row.pop().unwrap_or_default()).collect())
}

/// Rank of an arbitrary (possibly non-square) matrix.
pub fn rank(a: &[Vec<Rational>]) -> usize {
    let mut m: Matrix = a.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let pivot_row = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            if row[col].is_zero() {
                continue;
            }
            let f = &row[col] / &pivot_row[col];
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x -= &f * p;
            }
        }
        rank += 1;
    }
    rank
}

pub fn mat_vec(a: &[Vec<Rational>], x: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| row.iter().zip(x).fold(Rational::zero(), |acc, (p, q)| acc + p * q))
        .collect()
}
