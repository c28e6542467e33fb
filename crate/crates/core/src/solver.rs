//! Preconditioned conjugate gradients with a Lanczos condition estimate,
//! and a dense Cholesky reference solve.

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Cholesky};
use crate::precond::Preconditioner;

#[derive(Clone, Debug, Serialize)]
pub struct PcgReport {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `√(rᵀ M r)` before each iteration and after the last one.
    pub residual_history: Vec<f64>,
    /// `√(eᵀ W e)` with `e` the error against the supplied exact solution.
    pub energy_error_history: Option<Vec<f64>>,
    /// Approximate `κ(M W)` from the Lanczos tridiagonal of the CG coefficients.
    pub kappa_estimate: f64,
}

/// Solves `W x = b` by PCG from a zero initial guess. Stops when
/// `√(rᵀ M r)` has dropped by `tol` relative to its initial value.
pub fn pcg(
    w: &Mat<f64>,
    prec: Option<&dyn Preconditioner>,
    b: &[f64],
    tol: f64,
    maxit: usize,
    exact: Option<&[f64]>,
) -> Result<PcgReport> {
    let n = w.nrows();
    if b.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: b.len() });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let apply_m = |r: &[f64]| match prec {
        Some(p) => p.apply(r),
        None => r.to_vec(),
    };
    let energy = |x: &[f64]| -> Option<f64> {
        exact.map(|xs| {
            let e: Vec<f64> = x.iter().zip(xs).map(|(a, b)| a - b).collect();
            linalg::dot(&e, &linalg::matvec(w, &e)).max(0.0).sqrt()
        })
    };

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = apply_m(&r);
    let mut rz = linalg::dot(&r, &z);
    if rz < 0.0 {
        return Err(Error::Breakdown(0));
    }
    let r0 = rz.sqrt();
    let mut residuals = vec![r0];
    let mut energies = energy(&x).map(|e| vec![e]);
    let mut p = z.clone();
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut converged = r0 == 0.0;
    let mut it = 0;
    while !converged && it < maxit {
        let wp = linalg::matvec(w, &p);
        let pwp = linalg::dot(&p, &wp);
        if !(pwp > 0.0) {
            return Err(Error::Breakdown(it));
        }
        let alpha = rz / pwp;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * wp[k];
        }
        z = apply_m(&r);
        let rz_new = linalg::dot(&r, &z);
        if rz_new < 0.0 {
            return Err(Error::Breakdown(it));
        }
        let beta = rz_new / rz;
        alphas.push(alpha);
        betas.push(beta);
        rz = rz_new;
        it += 1;
        residuals.push(rz.sqrt());
        if let (Some(h), Some(e)) = (energies.as_mut(), energy(&x)) {
            h.push(e);
        }
        if rz.sqrt() <= tol * r0 {
            converged = true;
            break;
        }
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Ok(PcgReport {
        solution: x,
        iterations: it,
        converged,
        residual_history: residuals,
        energy_error_history: energies,
        kappa_estimate: lanczos_kappa(&alphas, &betas)?,
    })
}

/// Condition estimate from the CG coefficients: the tridiagonal
/// `T_kk = 1/α_k + β_{k−1}/α_{k−1}`, `T_{k,k+1} = √β_k / α_k`.
pub fn lanczos_kappa(alphas: &[f64], betas: &[f64]) -> Result<f64> {
    let m = alphas.len();
    if m == 0 {
        return Ok(1.0);
    }
    let t = Mat::from_fn(m, m, |i, j| {
        if i == j {
            let mut d = 1.0 / alphas[i];
            if i > 0 {
                d += betas[i - 1] / alphas[i - 1];
            }
            d
        } else if i + 1 == j {
            betas[i].sqrt() / alphas[i]
        } else if j + 1 == i {
            betas[j].sqrt() / alphas[j]
        } else {
            0.0
        }
    });
    let ev = linalg::sym_eigenvalues(&t)?;
    Ok((ev[m - 1] / ev[0]).max(1.0))
}

/// Dense Cholesky solve with a residual check.
pub fn direct_solve(w: &Mat<f64>, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != w.nrows() {
        return Err(Error::LengthMismatch { expected: w.nrows(), got: b.len() });
    }
    let x = Cholesky::new(w, "W")?.solve(b);
    let res: f64 = linalg::matvec(w, &x)
        .iter()
        .zip(b)
        .map(|(a, c)| (a - c) * (a - c))
        .sum::<f64>()
        .sqrt();
    let bn = linalg::dot(b, b).sqrt();
    if !(res <= 1e-10 * bn.max(f64::MIN_POSITIVE)) && bn > 0.0 {
        return Err(Error::NonFinite(format!("direct solve residual {res:e} for |b| = {bn:e}")));
    }
    Ok(x)
}
