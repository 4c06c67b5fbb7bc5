//! Linear symplectic maps in block form.
//!
//! A map is stored as the 2n×2n matrix `[[A, B], [A', B']]` acting on
//! `(J(0), J'(0))` column vectors. Group membership `MᵀJM = J` is tracked
//! through the max-column-sum defect, the matrix norm fixed for all
//! estimates in this crate.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Max-column-sum matrix norm (submultiplicative).
pub fn max_col_sum(m: &DMatrix<f64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        let s: f64 = m.column(j).iter().map(|v| v.abs()).sum();
        best = best.max(s);
    }
    best
}

/// The standard symplectic form `J = [[0, I], [-I, 0]]` with n×n blocks.
pub fn j_matrix(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// A 2n×2n real matrix with the block form `[[A, B], [A', B']]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    n: usize,
    m: DMatrix<f64>,
}

impl SymplecticMap {
    /// Wrap an existing 2n×2n matrix.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<SymplecticMap> {
        let rows = m.nrows();
        if rows != m.ncols() || rows % 2 != 0 || rows == 0 {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: m.ncols(),
            });
        }
        Ok(SymplecticMap { n: rows / 2, m })
    }

    pub fn from_blocks(
        a: &DMatrix<f64>,
        b: &DMatrix<f64>,
        a1: &DMatrix<f64>,
        b1: &DMatrix<f64>,
    ) -> Result<SymplecticMap> {
        let n = a.nrows();
        for blk in [a, b, a1, b1] {
            if blk.nrows() != n || blk.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: blk.nrows().max(blk.ncols()),
                });
            }
        }
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(a);
        m.view_mut((0, n), (n, n)).copy_from(b);
        m.view_mut((n, 0), (n, n)).copy_from(a1);
        m.view_mut((n, n), (n, n)).copy_from(b1);
        Ok(SymplecticMap { n, m })
    }

    pub fn identity(n: usize) -> SymplecticMap {
        SymplecticMap {
            n,
            m: DMatrix::identity(2 * n, 2 * n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn block_a(&self) -> DMatrix<f64> {
        self.m.view((0, 0), (self.n, self.n)).into()
    }

    pub fn block_b(&self) -> DMatrix<f64> {
        self.m.view((0, self.n), (self.n, self.n)).into()
    }

    pub fn block_a_prime(&self) -> DMatrix<f64> {
        self.m.view((self.n, 0), (self.n, self.n)).into()
    }

    pub fn block_b_prime(&self) -> DMatrix<f64> {
        self.m.view((self.n, self.n), (self.n, self.n)).into()
    }

    /// `‖MᵀJM − J‖` in the max-column-sum norm. Zero on the group; for
    /// n = 1 this reduces to `|det M − 1|`.
    pub fn defect(&self) -> f64 {
        let j = j_matrix(self.n);
        let lhs = self.m.transpose() * &j * &self.m;
        max_col_sum(&(lhs - j))
    }

    /// Matrix product `self · first` (apply `first`, then `self`).
    pub fn compose(&self, first: &SymplecticMap) -> Result<SymplecticMap> {
        if self.n != first.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: first.n,
            });
        }
        Ok(SymplecticMap {
            n: self.n,
            m: &self.m * &first.m,
        })
    }

    /// Max-column-sum distance to another map.
    pub fn distance(&self, other: &SymplecticMap) -> f64 {
        max_col_sum(&(&self.m - &other.m))
    }
}
