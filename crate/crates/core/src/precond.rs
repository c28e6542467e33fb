//! Two-level substructuring additive Schwarz preconditioner.
//!
//! Fine jump DOFs are split into coarse-face interiors and the wire
//! basket (DOFs on coarse edges and vertices); a coarse space given by
//! prolongation of the coarse jump space is added. The preconditioner is
//! `M = Σ_X E_X W_XX⁻¹ E_Xᵀ + R (Rᵀ W R)⁻¹ Rᵀ`.

use std::collections::BTreeMap;

use faer::Mat;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry as g;
use crate::jump::Prolongation;
use crate::linalg::{self, Cholesky};
use crate::mesh::MeshLevelPair;
use crate::multiscreen::InflatedMesh;

/// A symmetric positive definite approximation of `W⁻¹`.
pub trait Preconditioner: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, r: &[f64]) -> Vec<f64>;
}

/// `M = I`.
pub struct Identity(pub usize);

impl Preconditioner for Identity {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        r.to_vec()
    }
}

/// `M = W⁻¹` by a Cholesky factorization.
pub struct ExactInverse(pub Cholesky);

impl ExactInverse {
    pub fn new(w: &Mat<f64>) -> Result<Self> {
        Ok(ExactInverse(Cholesky::new(w, "W")?))
    }
}

impl Preconditioner for ExactInverse {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        self.0.solve(r)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DofPartition {
    /// Coarse facet id → fine DOFs whose vertex lies in its relative interior.
    pub face_sets: BTreeMap<usize, Vec<usize>>,
    /// DOFs whose vertex lies on a coarse edge or coarse vertex.
    pub wirebasket: Vec<usize>,
}

impl DofPartition {
    pub fn num_dofs(&self) -> usize {
        self.wirebasket.len() + self.face_sets.values().map(Vec::len).sum::<usize>()
    }
}

/// Splits fine jump DOFs by the location of their vertex on the coarse mesh.
pub fn partition_dofs(pair: &MeshLevelPair, fine: &InflatedMesh) -> Result<DofPartition> {
    let fmesh = &pair.fine;
    let tol = 1e-10;
    let vf = fmesh.vertex_facets();
    // Face (if any) whose relative interior contains each fine vertex.
    let mut location: Vec<Option<Option<usize>>> = vec![None; fmesh.num_vertices()];
    for (i, loc) in location.iter_mut().enumerate() {
        let x = fmesh.vertex(i);
        for &f in &vf[i] {
            let p = pair.parent[f];
            let bary = g::barycentric(x, &pair.coarse.facet_points(p));
            if bary.iter().any(|&l| l < -tol) {
                return Err(Error::Nesting(format!("fine vertex {i} lies outside coarse facet {p}")));
            }
            if bary.iter().all(|&l| l > tol) {
                *loc = Some(Some(p));
                break;
            }
            *loc = Some(None);
        }
    }
    let mut part = DofPartition::default();
    for (d, &(i, _)) in fine.jump_dofs().iter().enumerate() {
        match location[i] {
            Some(Some(face)) => part.face_sets.entry(face).or_default().push(d),
            Some(None) => part.wirebasket.push(d),
            None => return Err(Error::Nesting(format!("fine vertex {i} has no incident facet"))),
        }
    }
    Ok(part)
}

struct Block {
    dofs: Vec<usize>,
    chol: Cholesky,
}

pub struct SchwarzPreconditioner {
    n: usize,
    blocks: Vec<Block>,
    coarse: Option<(Prolongation, Cholesky)>,
}

impl SchwarzPreconditioner {
    /// Factorizes the face blocks, the wire-basket block and the coarse
    /// Galerkin matrix `Rᵀ W R`.
    pub fn build(w: &Mat<f64>, partition: &DofPartition, r: Option<&Prolongation>) -> Result<Self> {
        let n = w.nrows();
        if partition.num_dofs() != n {
            return Err(Error::LengthMismatch { expected: n, got: partition.num_dofs() });
        }
        let mut sets: Vec<(String, &Vec<usize>)> =
            partition.face_sets.iter().map(|(f, d)| (format!("face block {f}"), d)).collect();
        sets.push(("wire-basket block".to_string(), &partition.wirebasket));
        let blocks = sets
            .into_par_iter()
            .filter(|(_, d)| !d.is_empty())
            .map(|(name, dofs)| {
                let chol = Cholesky::new(&linalg::principal_submatrix(w, dofs), &name)?;
                Ok(Block { dofs: dofs.clone(), chol })
            })
            .collect::<Result<Vec<_>>>()?;
        let coarse = match r {
            Some(r) if r.n_coarse > 0 => {
                if r.n_fine != n {
                    return Err(Error::LengthMismatch { expected: n, got: r.n_fine });
                }
                let wc = coarse_matrix(w, r);
                Some((r.clone(), Cholesky::new(&wc, "coarse block")?))
            }
            _ => None,
        };
        Ok(SchwarzPreconditioner { n, blocks, coarse })
    }

    /// Number of nonempty subspaces.
    pub fn num_subspaces(&self) -> usize {
        self.blocks.len() + usize::from(self.coarse.is_some())
    }

    pub fn min_pivot(&self) -> f64 {
        let b = self.blocks.iter().map(|b| b.chol.min_pivot());
        let c = self.coarse.iter().map(|(_, ch)| ch.min_pivot());
        b.chain(c).fold(f64::INFINITY, f64::min)
    }
}

/// `Rᵀ W R` with `R` sparse.
pub fn coarse_matrix(w: &Mat<f64>, r: &Prolongation) -> Mat<f64> {
    let n = w.nrows();
    let wr: Vec<Vec<f64>> = r
        .columns
        .par_iter()
        .map(|col| {
            let mut out = vec![0.0; n];
            for &(k, x) in col {
                for (o, wk) in out.iter_mut().zip(w.col(k).iter()) {
                    *o += x * wk;
                }
            }
            out
        })
        .collect();
    let nc = r.n_coarse;
    let mut m = Mat::zeros(nc, nc);
    for a in 0..nc {
        for b in a..nc {
            let v: f64 = r.columns[a].iter().map(|&(k, x)| x * wr[b][k]).sum();
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    m
}

impl Preconditioner for SchwarzPreconditioner {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        assert_eq!(r.len(), self.n, "residual length");
        let parts: Vec<Vec<(usize, f64)>> = self
            .blocks
            .par_iter()
            .map(|b| {
                let local: Vec<f64> = b.dofs.iter().map(|&d| r[d]).collect();
                let x = b.chol.solve(&local);
                b.dofs.iter().copied().zip(x).collect()
            })
            .collect();
        let mut out = vec![0.0; self.n];
        for part in parts {
            for (d, v) in part {
                out[d] += v;
            }
        }
        if let Some((rp, chol)) = &self.coarse {
            let xc = chol.solve(&rp.apply_transpose(r));
            for (o, v) in out.iter_mut().zip(rp.apply(&xc)) {
                *o += v;
            }
        }
        out
    }
}

/// Dense matrix of a preconditioner, built column by column.
pub fn materialize(prec: &dyn Preconditioner) -> Mat<f64> {
    let n = prec.dim();
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            prec.apply(&e)
        })
        .collect();
    Mat::from_fn(n, n, |r, c| cols[c][r])
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Spectrum {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa: f64,
}

/// Extreme eigenvalues of `W` (no preconditioner) or of the preconditioned
/// operator, computed as the spectrum of `Lᵀ M L` with `W = L Lᵀ`.
pub fn condition_number(w: &Mat<f64>, prec: Option<&dyn Preconditioner>) -> Result<Spectrum> {
    let ev = match prec {
        None => linalg::sym_eigenvalues(w)?,
        Some(p) => {
            let l = Cholesky::new(w, "W")?.l();
            let mut m = materialize(p);
            linalg::symmetrize(&mut m);
            let mut a = l.transpose() * &m * &l;
            linalg::symmetrize(&mut a);
            linalg::sym_eigenvalues(&a)?
        }
    };
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    if !(lo > 0.0) {
        return Err(Error::NotPositiveDefinite(format!("smallest eigenvalue {lo}")));
    }
    Ok(Spectrum { lambda_min: lo, lambda_max: hi, kappa: hi / lo })
}
