//! Dense matrices over the rationals with exact Gauss-Jordan elimination.
//!
//! Every rank, nullity, kernel basis and subspace in the crate goes through
//! this module; floating point only appears once a basis is orthonormalized.
//! Elimination skips zero entries, which keeps the ±1 boundary matrices fast
//! enough despite arbitrary precision arithmetic.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug)]
pub struct Rref {
    pub matrix: RationalMatrix,
    pub pivots: Vec<usize>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RationalMatrix { rows, cols, data }
    }

    /// Integer matrix from row slices. Panics on ragged input.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::from_fn(rows.len(), cols, |i, j| int(rows[i][j]))
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        self.data[i * self.cols + j] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, rhs: &RationalMatrix) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        out
    }

    /// `[self | rhs]`.
    pub fn hstack(&self, rhs: &RationalMatrix) -> Self {
        assert_eq!(self.rows, rhs.rows, "row mismatch in hstack");
        Self::from_fn(self.rows, self.cols + rhs.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                rhs.get(i, j - self.cols).clone()
            }
        })
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self.get(i, cols[j]).clone())
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self::from_fn(rows.len(), self.cols, |i, j| self.get(rows[i], j).clone())
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = m.get(row, col).recip();
            let nz: Vec<usize> = (col..m.cols)
                .filter(|&j| !m.get(row, j).is_zero())
                .collect();
            for &j in &nz {
                let idx = row * m.cols + j;
                m.data[idx] *= &inv;
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let factor = m.get(r, col).clone();
                if factor.is_zero() {
                    continue;
                }
                for &j in &nz {
                    let delta = &factor * m.get(row, j);
                    let idx = r * m.cols + j;
                    m.data[idx] -= delta;
                }
            }
            pivots.push(col);
            row += 1;
        }
        Rref { matrix: m, pivots }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        // Eliminate along the shorter side.
        if self.rows < self.cols {
            self.transpose().rref().pivots.len()
        } else {
            self.rref().pivots.len()
        }
    }

    /// Basis of the right null space as columns, one per free variable of the
    /// reduced echelon form (free entry 1, other free entries 0).
    pub fn kernel_basis(&self) -> RationalMatrix {
        let Rref { matrix: r, pivots } = self.rref();
        let free: Vec<usize> = {
            let mut is_pivot = vec![false; self.cols];
            for &p in &pivots {
                is_pivot[p] = true;
            }
            (0..self.cols).filter(|&j| !is_pivot[j]).collect()
        };
        let mut k = RationalMatrix::zeros(self.cols, free.len());
        for (c, &f) in free.iter().enumerate() {
            k.set(f, c, Rational::one());
            for (row, &p) in pivots.iter().enumerate() {
                let v = r.get(row, f);
                if !v.is_zero() {
                    k.set(p, c, -v.clone());
                }
            }
        }
        k
    }

    /// Columns of `self` forming a basis of its column space (first maximal
    /// independent subset, left to right).
    pub fn column_space_basis(&self) -> RationalMatrix {
        let pivots = self.rref().pivots;
        self.select_columns(&pivots)
    }

    /// Solves `self * X = rhs` for a matrix `self` of full column rank.
    pub fn solve(&self, rhs: &RationalMatrix) -> Result<RationalMatrix> {
        assert_eq!(self.rows, rhs.rows, "row mismatch in solve");
        let n = self.cols;
        let Rref { matrix: r, pivots } = self.hstack(rhs).rref();
        if pivots.iter().any(|&p| p >= n) {
            return Err(Error::Structural(
                "right-hand side is not in the column space".into(),
            ));
        }
        if pivots.len() != n {
            return Err(Error::Structural(
                "coefficient matrix is not of full column rank".into(),
            ));
        }
        Ok(RationalMatrix::from_fn(n, rhs.cols, |i, j| {
            r.get(i, n + j).clone()
        }))
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| to_f64(self.get(i, j)))
    }

    /// Entries as strings such as `-1/2`, row-major.
    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect())
            .collect()
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RationalMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.to_string_rows() {
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn to_f64(q: &Rational) -> f64 {
    if q.is_integer() {
        return q.numer().to_f64().unwrap_or(f64::NAN);
    }
    let (n, d) = (q.numer().to_f64(), q.denom().to_f64());
    match (n, d) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Huge numerator/denominator: scale down before dividing.
            let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(900);
            let n = (q.numer().abs() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            if q.is_negative() {
                -n / d
            } else {
                n / d
            }
        }
    }
}
