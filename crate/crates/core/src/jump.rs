//! The discrete jump space: per-branch nodal traces, the jump basis and
//! coarse-to-fine prolongation.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry as g;
use crate::mesh::MeshLevelPair;
use crate::multiscreen::InflatedMesh;

/// Coefficients on the jump DOFs of an [`InflatedMesh`].
pub type JumpVector = Vec<f64>;

/// Nodal values per generalized vertex. On an oriented facet the field is
/// the linear interpolant of the values of the branches containing it.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceField {
    pub values: Vec<f64>,
}

impl TraceField {
    pub fn zeros(inflated: &InflatedMesh) -> Self {
        TraceField { values: vec![0.0; inflated.num_gvertices()] }
    }

    /// Field with value `f(i)` on every branch of vertex `i` (a single trace).
    pub fn single_trace(inflated: &InflatedMesh, f: impl Fn(usize) -> f64) -> Self {
        let values = inflated.generalized_vertices().iter().map(|gv| f(gv.vertex)).collect();
        TraceField { values }
    }

    /// Nodal values at the local vertices of oriented facet `t`.
    pub fn nodal(&self, inflated: &InflatedMesh, t: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate().take(inflated.dim()) {
            *o = self.values[inflated.gv_at(t, k)];
        }
        out
    }

    /// Value on oriented facet `t` at barycentric coordinates `bary`.
    pub fn eval(&self, inflated: &InflatedMesh, t: usize, bary: &[f64]) -> f64 {
        let n = self.nodal(inflated, t);
        bary.iter().zip(n).map(|(l, v)| l * v).sum()
    }
}

/// Trace of the jump basis function of `dof = (i, j)`: `+1` on branch `j`
/// of vertex `i`, `-1` on its reference branch, zero elsewhere.
pub fn basis_trace(dof: (usize, usize), inflated: &InflatedMesh) -> Result<TraceField> {
    let (i, j) = dof;
    inflated.dof_index(i, j)?;
    let mut field = TraceField::zeros(inflated);
    field.values[inflated.gv_index(i, j)] = 1.0;
    field.values[inflated.gv_index(i, inflated.q()[i] - 1)] = -1.0;
    Ok(field)
}

/// Linear combination of the basis traces with coefficients `v`.
pub fn expand(v: &[f64], inflated: &InflatedMesh) -> Result<TraceField> {
    if v.len() != inflated.num_dofs() {
        return Err(Error::LengthMismatch { expected: inflated.num_dofs(), got: v.len() });
    }
    let mut field = TraceField::zeros(inflated);
    for (&(i, j), &c) in inflated.jump_dofs().iter().zip(v) {
        field.values[inflated.gv_index(i, j)] += c;
        field.values[inflated.gv_index(i, inflated.q()[i] - 1)] -= c;
    }
    Ok(field)
}

/// Jump-basis coordinates of a trace field modulo single traces: the
/// branch mean is removed at every vertex, so `project(expand(v)) = v`
/// and single traces map to zero.
pub fn project(field: &TraceField, inflated: &InflatedMesh) -> Result<JumpVector> {
    if field.values.len() != inflated.num_gvertices() {
        return Err(Error::LengthMismatch {
            expected: inflated.num_gvertices(),
            got: field.values.len(),
        });
    }
    let mut out = vec![0.0; inflated.num_dofs()];
    for (d, &(i, j)) in inflated.jump_dofs().iter().enumerate() {
        let q = inflated.q()[i];
        let base = inflated.gv_index(i, 0);
        let mean = field.values[base..base + q].iter().sum::<f64>() / q as f64;
        out[d] = field.values[base + j] - mean;
    }
    Ok(out)
}

/// Sparse map from coarse jump coefficients to fine jump coefficients.
#[derive(Clone, Debug)]
pub struct Prolongation {
    pub n_fine: usize,
    pub n_coarse: usize,
    /// Column `c` lists `(fine dof, value)` pairs in increasing fine dof order.
    pub columns: Vec<Vec<(usize, f64)>>,
}

impl Prolongation {
    /// `R v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_fine];
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, w) in col {
                out[r] += w * v[c];
            }
        }
        out
    }

    /// `Rᵀ w`.
    pub fn apply_transpose(&self, w: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|col| col.iter().map(|&(r, x)| x * w[r]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> faer::Mat<f64> {
        let mut m = faer::Mat::zeros(self.n_fine, self.n_coarse);
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, w) in col {
                m[(r, c)] = w;
            }
        }
        m
    }
}

/// Embeds the coarse jump space in the fine one by evaluating each coarse
/// basis trace at the fine generalized vertices. A fine oriented facet
/// reads the side of its parent whose normal points the same way.
pub fn build_prolongation(
    pair: &MeshLevelPair,
    coarse: &InflatedMesh,
    fine: &InflatedMesh,
) -> Result<Prolongation> {
    let fmesh = fine.base();
    let cmesh = coarse.base();
    // Row of the fine-gv <- coarse-gv interpolation, for every fine gv.
    let mut interp: Vec<BTreeMap<usize, f64>> = Vec::with_capacity(fine.num_gvertices());
    for gv in fine.generalized_vertices() {
        let x = fmesh.vertex(gv.vertex);
        let mut row: Option<BTreeMap<usize, f64>> = None;
        for &t in &gv.alpha {
            let of = &fine.oriented_facets()[t];
            let p = pair.parent[of.facet];
            let cn = cmesh.facet_normal(p);
            let dot = g::dot(cn, of.normal);
            if dot.abs() < 0.5 {
                return Err(Error::Nesting(format!(
                    "fine facet {} is not coplanar with its parent {p}",
                    of.facet
                )));
            }
            let ct = 2 * p + usize::from(dot < 0.0);
            let bary = g::barycentric(x, &cmesh.facet_points(p));
            let mut r = BTreeMap::new();
            for (k, &l) in bary.iter().enumerate() {
                if l.abs() > 1e-13 {
                    *r.entry(coarse.gv_at(ct, k)).or_insert(0.0) += l;
                }
            }
            match &row {
                None => row = Some(r),
                Some(prev) => {
                    let same = prev.len() == r.len()
                        && prev.iter().zip(&r).all(|((a, x), (b, y))| a == b && (x - y).abs() < 1e-10);
                    if !same {
                        return Err(Error::Nesting(format!(
                            "branch ({}, {}) straddles distinct coarse branches",
                            gv.vertex, gv.branch
                        )));
                    }
                }
            }
        }
        interp.push(row.unwrap_or_default());
    }

    let mut columns = Vec::with_capacity(coarse.num_dofs());
    for &(ci, cj) in coarse.jump_dofs() {
        let plus = coarse.gv_index(ci, cj);
        let minus = coarse.gv_index(ci, coarse.q()[ci] - 1);
        // Fine field values of this coarse basis trace.
        let mut field = TraceField::zeros(fine);
        for (fgv, row) in interp.iter().enumerate() {
            let v = row.get(&plus).copied().unwrap_or(0.0) - row.get(&minus).copied().unwrap_or(0.0);
            field.values[fgv] = v;
        }
        let coeffs = project(&field, fine)?;
        let col = coeffs
            .into_iter()
            .enumerate()
            .filter(|(_, w)| *w != 0.0)
            .collect();
        columns.push(col);
    }
    Ok(Prolongation { n_fine: fine.num_dofs(), n_coarse: coarse.num_dofs(), columns })
}
