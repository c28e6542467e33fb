//! Galerkin matrix of the hypersingular form and the Neumann load vector.
//!
//! Surface curls of piecewise-linear traces are constant per facet, so
//! `W = Σ_d B_dᵀ V B_d` where `V_{TT'} = ∬_{T×T'} G` over pairs of
//! geometric facets and `B_d` holds component `d` of the summed curls of
//! both oriented copies of each facet.

use std::io::Write;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self as g, Vec3};
use crate::jump::TraceField;
use crate::mesh::SurfaceMesh;
use crate::multiscreen::InflatedMesh;
use crate::quadrature::{
    gauss_legendre, log_segment_integral, log_self_integral, log_vertex_integral, ref_map,
    Adjacency, SingularRules, TriangleRule,
};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
/// Subdivision depth limit for nearly touching disjoint triangles.
const MAX_NEAR_DEPTH: usize = 4;

/// Fundamental solution of the Laplacian.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    /// `−ln|x−y| / 2π`
    Laplace2d,
    /// `1 / (4π|x−y|)`
    Laplace3d,
}

impl Kernel {
    pub fn for_dim(dim: usize) -> Self {
        if dim == 2 {
            Kernel::Laplace2d
        } else {
            Kernel::Laplace3d
        }
    }

    #[inline]
    pub fn eval(self, x: Vec3, y: Vec3) -> f64 {
        let r = g::dist(x, y);
        match self {
            Kernel::Laplace2d => -r.ln() / TWO_PI,
            Kernel::Laplace3d => 1.0 / (FOUR_PI * r),
        }
    }
}

/// Quadrature orders are Gauss–Legendre points per parameter direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub far_order: usize,
    pub singular_order: usize,
    /// Disjoint pairs closer than this multiple of the larger facet
    /// diameter are treated as near.
    pub near_threshold: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { far_order: 4, singular_order: 12, near_threshold: 2.0 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.far_order < 1 || self.singular_order < 1 {
            return Err(Error::InvalidArgument("quadrature orders must be >= 1".into()));
        }
        if !(self.near_threshold >= 0.0) {
            return Err(Error::InvalidArgument("near_threshold must be >= 0".into()));
        }
        Ok(())
    }
}

/// Precomputed rules for facet-pair integrals of the kernel.
pub struct PairQuadrature {
    config: QuadratureConfig,
    kernel: Kernel,
    singular: Option<SingularRules>,
    far_tri: TriangleRule,
    far_line: (Vec<f64>, Vec<f64>),
    near_line: (Vec<f64>, Vec<f64>),
}

impl PairQuadrature {
    pub fn new(dim: usize, config: QuadratureConfig) -> Result<Self> {
        config.validate()?;
        Ok(PairQuadrature {
            config,
            kernel: Kernel::for_dim(dim),
            singular: (dim == 3).then(|| SingularRules::new(config.singular_order)),
            far_tri: TriangleRule::collapsed(config.far_order),
            far_line: gauss_legendre(config.far_order),
            near_line: gauss_legendre(config.singular_order),
        })
    }

    /// `∬_{a×b} G(x, y)` for facets `a`, `b` of `mesh`.
    pub fn facet_pair(&self, mesh: &SurfaceMesh, a: usize, b: usize) -> f64 {
        let fa = mesh.facet(a);
        let fb = mesh.facet(b);
        let shared: Vec<usize> = fa.iter().copied().filter(|v| fb.contains(v)).collect();
        match self.kernel {
            Kernel::Laplace2d => {
                let pa = mesh.facet_points(a);
                let pb = mesh.facet_points(b);
                let raw = match shared.len() {
                    2 => log_self_integral(g::dist(pa[0], pa[1])),
                    1 => {
                        let v = shared[0];
                        let oa = if fa[0] == v { fa[1] } else { fa[0] };
                        let ob = if fb[0] == v { fb[1] } else { fb[0] };
                        log_vertex_integral(mesh.vertex(v), mesh.vertex(oa), mesh.vertex(ob))
                    }
                    _ => self.log_disjoint(pa[0], pa[1], pb[0], pb[1]),
                };
                -raw / TWO_PI
            }
            Kernel::Laplace3d => {
                let pt = |ids: [usize; 3]| -> [Vec3; 3] {
                    [mesh.vertex(ids[0]), mesh.vertex(ids[1]), mesh.vertex(ids[2])]
                };
                match shared.len() {
                    3 => {
                        let t = pt([fa[0], fa[1], fa[2]]);
                        self.singular_pair(Adjacency::Identical, &t, &t)
                    }
                    2 => {
                        let ra = fa.iter().copied().find(|v| !shared.contains(v)).unwrap();
                        let rb = fb.iter().copied().find(|v| !shared.contains(v)).unwrap();
                        let ta = pt([shared[0], shared[1], ra]);
                        let tb = pt([shared[0], shared[1], rb]);
                        self.singular_pair(Adjacency::Edge, &ta, &tb)
                    }
                    1 => {
                        let v = shared[0];
                        let oa: Vec<usize> = fa.iter().copied().filter(|&x| x != v).collect();
                        let ob: Vec<usize> = fb.iter().copied().filter(|&x| x != v).collect();
                        let ta = pt([v, oa[0], oa[1]]);
                        let tb = pt([v, ob[0], ob[1]]);
                        self.singular_pair(Adjacency::Vertex, &ta, &tb)
                    }
                    _ => {
                        let ta = pt([fa[0], fa[1], fa[2]]);
                        let tb = pt([fb[0], fb[1], fb[2]]);
                        self.disjoint_triangles(&ta, &tb, 0)
                    }
                }
            }
        }
    }

    fn singular_pair(&self, adj: Adjacency, a: &[Vec3; 3], b: &[Vec3; 3]) -> f64 {
        let rule = self.singular.as_ref().expect("3D rules").rule(adj);
        let mut s = 0.0;
        for ((x, y), w) in rule.x.iter().zip(&rule.y).zip(&rule.weights) {
            s += w / g::dist(ref_map(a, *x), ref_map(b, *y));
        }
        4.0 * tri_area(a) * tri_area(b) * s / FOUR_PI
    }

    fn disjoint_triangles(&self, a: &[Vec3; 3], b: &[Vec3; 3], depth: usize) -> f64 {
        let (ca, ra) = bounding_sphere(a);
        let (cb, rb) = bounding_sphere(b);
        let diam = tri_diameter(a).max(tri_diameter(b));
        let limit = self.config.near_threshold * diam;
        let near = g::dist(ca, cb) - ra - rb < limit && triangle_distance(a, b) < limit;
        if !near || depth >= MAX_NEAR_DEPTH {
            return self.far_triangles(a, b);
        }
        // Split the larger triangle and recurse.
        let (big, small) = if tri_diameter(a) >= tri_diameter(b) { (a, b) } else { (b, a) };
        split4(big).iter().map(|c| self.disjoint_triangles(c, small, depth + 1)).sum()
    }

    fn far_triangles(&self, a: &[Vec3; 3], b: &[Vec3; 3]) -> f64 {
        let pa = self.far_tri.points(a);
        let pb = self.far_tri.points(b);
        let mut s = 0.0;
        for (x, wx) in pa.iter().zip(&self.far_tri.weights) {
            let mut inner = 0.0;
            for (y, wy) in pb.iter().zip(&self.far_tri.weights) {
                inner += wy / g::dist(*x, *y);
            }
            s += wx * inner;
        }
        tri_area(a) * tri_area(b) * s / FOUR_PI
    }

    /// `∬ ln|x−y|` over disjoint segments: Gauss on the outer segment,
    /// closed form on the inner one.
    fn log_disjoint(&self, a0: Vec3, a1: Vec3, b0: Vec3, b1: Vec3) -> f64 {
        let la = g::dist(a0, a1);
        let lb = g::dist(b0, b1);
        let db = g::scale(g::sub(b1, b0), 1.0 / lb);
        let d = crate::mesh::segment_segment_distance(a0, a1, b0, b1);
        let (x, w) = if d < self.config.near_threshold * la.max(lb) { &self.near_line } else { &self.far_line };
        let mut s = 0.0;
        for (t, wt) in x.iter().zip(w) {
            s += wt * log_segment_integral(g::lerp(a0, a1, *t), b0, db, lb);
        }
        la * s
    }
}

fn tri_area(t: &[Vec3; 3]) -> f64 {
    0.5 * g::norm(g::cross(g::sub(t[1], t[0]), g::sub(t[2], t[0])))
}

fn tri_diameter(t: &[Vec3; 3]) -> f64 {
    g::dist(t[0], t[1]).max(g::dist(t[1], t[2])).max(g::dist(t[2], t[0]))
}

fn bounding_sphere(t: &[Vec3; 3]) -> (Vec3, f64) {
    let c = g::centroid(t);
    let r = t.iter().map(|p| g::dist(*p, c)).fold(0.0, f64::max);
    (c, r)
}

fn split4(t: &[Vec3; 3]) -> [[Vec3; 3]; 4] {
    let m = |a: Vec3, b: Vec3| g::scale(g::add(a, b), 0.5);
    let (ab, bc, ca) = (m(t[0], t[1]), m(t[1], t[2]), m(t[2], t[0]));
    [[t[0], ab, ca], [ab, t[1], bc], [ca, bc, t[2]], [bc, ca, ab]]
}

/// Distance between two disjoint triangles.
fn triangle_distance(a: &[Vec3; 3], b: &[Vec3; 3]) -> f64 {
    let mut d = f64::INFINITY;
    for i in 0..3 {
        d = d.min(g::point_triangle_distance(a[i], b[0], b[1], b[2]));
        d = d.min(g::point_triangle_distance(b[i], a[0], a[1], a[2]));
        for j in 0..3 {
            d = d.min(crate::mesh::segment_segment_distance(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3]));
        }
    }
    d
}

/// Dense `V_{TT'} = ∬_{T×T'} G` over all pairs of geometric facets.
/// Rows are computed in parallel; only the upper triangle is integrated
/// and mirrored, so `V` is exactly symmetric.
pub fn assemble_v(mesh: &SurfaceMesh, config: &QuadratureConfig) -> Result<Mat<f64>> {
    let quad = PairQuadrature::new(mesh.dim(), *config)?;
    let n = mesh.num_facets();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|a| (a..n).map(|b| quad.facet_pair(mesh, a, b)).collect())
        .collect();
    let mut v = Mat::zeros(n, n);
    for (a, row) in rows.iter().enumerate() {
        for (k, &x) in row.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::Quadrature(a, a + k));
            }
            v[(a, a + k)] = x;
            v[(a + k, a)] = x;
        }
    }
    Ok(v)
}

/// `n_t × ∇λ_k` for each local vertex `k` of oriented facet `t`. In 2D the
/// value is the out-of-plane vector `(n_t × τ) ∂_s λ_k`.
pub fn local_curls(inflated: &InflatedMesh, t: usize) -> [Vec3; 3] {
    let of = &inflated.oriented_facets()[t];
    let p = inflated.base().facet_points(of.facet);
    let mut out = [[0.0; 3]; 3];
    if inflated.dim() == 2 {
        let e = g::sub(p[1], p[0]);
        let l2 = g::dot(e, e);
        let grad1 = g::scale(e, 1.0 / l2);
        out[0] = g::cross(of.normal, g::scale(grad1, -1.0));
        out[1] = g::cross(of.normal, grad1);
    } else {
        let nn = g::cross(g::sub(p[1], p[0]), g::sub(p[2], p[0]));
        let n2 = g::dot(nn, nn);
        for k in 0..3 {
            let grad = g::scale(g::cross(nn, g::sub(p[(k + 2) % 3], p[(k + 1) % 3])), 1.0 / n2);
            out[k] = g::cross(of.normal, grad);
        }
    }
    out
}

/// Surface curl of a trace field on oriented facet `t` (constant per facet).
pub fn surface_curl(inflated: &InflatedMesh, t: usize, field: &TraceField) -> Vec3 {
    let c = local_curls(inflated, t);
    let vals = field.nodal(inflated, t);
    let mut out = [0.0; 3];
    for k in 0..inflated.dim() {
        out = g::add(out, g::scale(c[k], vals[k]));
    }
    out
}

/// Sparse curl matrix: for each jump DOF, the list of `(facet, curl)` with
/// the curls of both oriented copies summed.
pub fn curl_columns(inflated: &InflatedMesh) -> Vec<Vec<(usize, Vec3)>> {
    let mut cols: Vec<Vec<(usize, Vec3)>> = vec![Vec::new(); inflated.num_dofs()];
    let add = |cols: &mut Vec<Vec<(usize, Vec3)>>, dof: usize, f: usize, c: Vec3, sign: f64| {
        let col = &mut cols[dof];
        match col.iter_mut().find(|(ff, _)| *ff == f) {
            Some((_, acc)) => *acc = g::add(*acc, g::scale(c, sign)),
            None => col.push((f, g::scale(c, sign))),
        }
    };
    for t in 0..inflated.oriented_facets().len() {
        let f = t / 2;
        let curls = local_curls(inflated, t);
        for (k, &c) in curls.iter().enumerate().take(inflated.dim()) {
            let i = inflated.base().facet(f)[k];
            let q = inflated.q()[i];
            if q < 2 {
                continue;
            }
            let b = inflated.branch_of(t, k);
            if b + 1 < q {
                add(&mut cols, inflated.dof_index(i, b).unwrap(), f, c, 1.0);
            } else {
                for j in 0..q - 1 {
                    add(&mut cols, inflated.dof_index(i, j).unwrap(), f, c, -1.0);
                }
            }
        }
    }
    for col in &mut cols {
        col.sort_by_key(|(f, _)| *f);
    }
    cols
}

/// `W = Σ_d B_dᵀ V B_d`, computed on the upper triangle and mirrored.
pub fn assemble_w_from_v(inflated: &InflatedMesh, v: &Mat<f64>) -> Result<Mat<f64>> {
    let cols = curl_columns(inflated);
    let n = cols.len();
    let nf = v.nrows();
    // Y[:, ν] per component: V B_d e_ν, dense over facets.
    let y: Vec<Vec<[f64; 3]>> = cols
        .par_iter()
        .map(|col| {
            let mut out = vec![[0.0; 3]; nf];
            for &(f, c) in col {
                for (r, o) in out.iter_mut().enumerate() {
                    let vf = v[(r, f)];
                    o[0] += vf * c[0];
                    o[1] += vf * c[1];
                    o[2] += vf * c[2];
                }
            }
            out
        })
        .collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|a| {
            (a..n)
                .map(|b| cols[a].iter().map(|&(f, c)| g::dot(c, y[b][f])).sum())
                .collect()
        })
        .collect();
    let mut w = Mat::zeros(n, n);
    for (a, row) in rows.iter().enumerate() {
        for (k, &x) in row.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite(format!("W[{a}, {}]", a + k)));
            }
            w[(a, a + k)] = x;
            w[(a + k, a)] = x;
        }
    }
    Ok(w)
}

/// Galerkin matrix of the hypersingular form on the jump basis.
pub fn assemble_w(inflated: &InflatedMesh, config: &QuadratureConfig) -> Result<Mat<f64>> {
    let v = assemble_v(inflated.base(), config)?;
    assemble_w_from_v(inflated, &v)
}

/// `a(u, ·)` applied to every jump basis function, for an arbitrary trace
/// field `u` (for instance a single trace, which must give zeros).
pub fn form_row(inflated: &InflatedMesh, v: &Mat<f64>, u: &TraceField) -> Vec<f64> {
    let nf = inflated.base().num_facets();
    let mut bu = vec![[0.0; 3]; nf];
    for t in 0..2 * nf {
        bu[t / 2] = g::add(bu[t / 2], surface_curl(inflated, t, u));
    }
    let cols = curl_columns(inflated);
    cols.iter()
        .map(|col| {
            let mut s = 0.0;
            for &(f, c) in col {
                for (fp, b) in bu.iter().enumerate() {
                    s += v[(f, fp)] * g::dot(c, *b);
                }
            }
            s
        })
        .collect()
}

/// Load vector `L_ν = Σ_t ∫_t data(x, n_t) φ_ν^t`. Neumann data is given
/// as a function of the point and the oriented normal.
pub fn assemble_rhs_neumann(
    inflated: &InflatedMesh,
    data: &(dyn Fn(Vec3, Vec3) -> f64 + Sync),
    config: &QuadratureConfig,
) -> Result<Vec<f64>> {
    config.validate()?;
    let mesh = inflated.base();
    let dim = mesh.dim();
    let (bary, weights): (Vec<[f64; 3]>, Vec<f64>) = if dim == 2 {
        let (x, w) = gauss_legendre(config.far_order.max(2));
        (x.iter().map(|t| [1.0 - t, *t, 0.0]).collect(), w)
    } else {
        let r = TriangleRule::collapsed(config.far_order.max(2));
        (r.bary, r.weights)
    };
    // Per oriented facet and local vertex: ∫ data λ_k.
    let local: Vec<[f64; 3]> = (0..inflated.oriented_facets().len())
        .into_par_iter()
        .map(|t| {
            let of = &inflated.oriented_facets()[t];
            let p = mesh.facet_points(of.facet);
            let meas = mesh.facet_measure(of.facet);
            let mut acc = [0.0; 3];
            for (l, w) in bary.iter().zip(&weights) {
                let mut x = [0.0; 3];
                for k in 0..dim {
                    x = g::add(x, g::scale(p[k], l[k]));
                }
                let d = data(x, of.normal);
                for k in 0..dim {
                    acc[k] += w * meas * d * l[k];
                }
            }
            acc
        })
        .collect();
    let mut rhs = vec![0.0; inflated.num_dofs()];
    for (t, acc) in local.iter().enumerate() {
        for (k, &val) in acc.iter().enumerate().take(dim) {
            if !val.is_finite() {
                return Err(Error::NonFinite(format!("Neumann data on oriented facet {t}")));
            }
            let i = mesh.facet(t / 2)[k];
            let q = inflated.q()[i];
            if q < 2 {
                continue;
            }
            let b = inflated.branch_of(t, k);
            if b + 1 < q {
                rhs[inflated.dof_index(i, b)?] += val;
            } else {
                for j in 0..q - 1 {
                    rhs[inflated.dof_index(i, j)?] -= val;
                }
            }
        }
    }
    Ok(rhs)
}

/// Load vector for a vector field `g`: Neumann data `g·n_t`.
pub fn assemble_rhs(
    inflated: &InflatedMesh,
    gfield: &(dyn Fn(Vec3) -> Vec3 + Sync),
    config: &QuadratureConfig,
) -> Result<Vec<f64>> {
    assemble_rhs_neumann(inflated, &|x, n| g::dot(gfield(x), n), config)
}

/// Magic bytes of the binary matrix dump.
pub const DUMP_MAGIC: &[u8; 6] = b"SBEMW\0";

/// Binary dump: 16-byte header (magic, two zero bytes, little-endian `u32`
/// size, four zero bytes) followed by row-major little-endian `f64`s.
pub fn write_matrix_binary(w: &Mat<f64>, out: &mut impl Write) -> Result<()> {
    let n = w.nrows();
    let mut header = [0u8; 16];
    header[..6].copy_from_slice(DUMP_MAGIC);
    header[8..12].copy_from_slice(&(n as u32).to_le_bytes());
    out.write_all(&header)?;
    for r in 0..n {
        for c in 0..w.ncols() {
            out.write_all(&w[(r, c)].to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_matrix_binary(bytes: &[u8]) -> Result<Mat<f64>> {
    if bytes.len() < 16 || &bytes[..6] != DUMP_MAGIC {
        return Err(Error::Parse { line: 0, msg: "not a matrix dump".into() });
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if bytes.len() != 16 + 8 * n * n {
        return Err(Error::Parse { line: 0, msg: "truncated matrix dump".into() });
    }
    Ok(Mat::from_fn(n, n, |r, c| {
        let o = 16 + 8 * (r * n + c);
        f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap())
    }))
}

/// MatrixMarket dense array format (column-major values).
pub fn write_matrix_market(w: &Mat<f64>, out: &mut impl Write) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix array real general")?;
    writeln!(out, "{} {}", w.nrows(), w.ncols())?;
    for c in 0..w.ncols() {
        for r in 0..w.nrows() {
            writeln!(out, "{:.17e}", w[(r, c)])?;
        }
    }
    Ok(())
}
