//! Thin wrappers over faer for the dense kernels used by the solvers.

use faer::linalg::solvers::{Llt, Solve};
use faer::{Col, Mat, Side};

use crate::error::{Error, Result};

/// Cholesky factor `A = L Lᵀ` of a symmetric positive definite matrix.
pub struct Cholesky {
    llt: Llt<f64>,
}

impl Cholesky {
    pub fn new(a: &Mat<f64>, what: &str) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidArgument(format!("{what}: matrix is not square")));
        }
        let llt = a
            .llt(Side::Lower)
            .map_err(|_| Error::NotPositiveDefinite(what.to_string()))?;
        Ok(Cholesky { llt })
    }

    pub fn dim(&self) -> usize {
        self.llt.L().nrows()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Col::from_fn(b.len(), |i| b[i]);
        let x = self.llt.solve(&rhs);
        x.iter().copied().collect()
    }

    pub fn solve_mat(&self, b: &Mat<f64>) -> Mat<f64> {
        self.llt.solve(b)
    }

    pub fn l(&self) -> Mat<f64> {
        self.llt.L().to_owned()
    }

    /// Smallest diagonal entry of `L` (the square root of the smallest pivot).
    pub fn min_pivot(&self) -> f64 {
        let l = self.llt.L();
        (0..l.nrows()).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min)
    }
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    let mut ev = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::NonFinite(format!("symmetric eigensolver failed: {e:?}")))?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub fn matvec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == 0.0 {
            continue;
        }
        let col = a.col(j);
        for (yi, aij) in y.iter_mut().zip(col.iter()) {
            *yi += aij * xj;
        }
    }
    y
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn principal_submatrix(a: &Mat<f64>, idx: &[usize]) -> Mat<f64> {
    Mat::from_fn(idx.len(), idx.len(), |r, c| a[(idx[r], idx[c])])
}

/// Symmetrizes `a` in place by averaging with its transpose.
pub fn symmetrize(a: &mut Mat<f64>) {
    let n = a.nrows();
    for r in 0..n {
        for c in r + 1..n {
            let v = 0.5 * (a[(r, c)] + a[(c, r)]);
            a[(r, c)] = v;
            a[(c, r)] = v;
        }
    }
}

/// Largest absolute entry.
pub fn max_abs(a: &Mat<f64>) -> f64 {
    let mut m: f64 = 0.0;
    for c in 0..a.ncols() {
        for r in 0..a.nrows() {
            m = m.max(a[(r, c)].abs());
        }
    }
    m
}
