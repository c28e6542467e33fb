//! Double-layer potential of a jump density, the exact plus-shape
//! solution, and grid errors.
//!
//! Densities are piecewise linear per oriented facet, so the potential of
//! each facet is evaluated in closed form (signed solid angle plus edge
//! logarithms in 3D, subtended angle plus a logarithm in 2D).

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{self as g, Vec3};
use crate::jump::{expand, TraceField};
use crate::mesh::SurfaceMesh;
use crate::multiscreen::InflatedMesh;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Evaluation points kept at distance greater than `eps_mask` from Γ.
#[derive(Clone, Debug)]
pub struct EvaluationGrid {
    pub points: Vec<Vec3>,
    pub eps_mask: f64,
}

impl EvaluationGrid {
    /// Tensor grid with `counts[k]` equispaced points in `[lo[k], hi[k]]`
    /// (endpoints included; a count of 1 takes `lo[k]`), minus the points
    /// within `eps_mask` of the mesh.
    pub fn cartesian(mesh: &SurfaceMesh, lo: Vec3, hi: Vec3, counts: [usize; 3], eps_mask: f64) -> Self {
        let axis = |k: usize| -> Vec<f64> {
            let n = counts[k].max(1);
            if n == 1 {
                vec![lo[k]]
            } else {
                (0..n).map(|i| lo[k] + (hi[k] - lo[k]) * i as f64 / (n - 1) as f64).collect()
            }
        };
        let (xs, ys, zs) = (axis(0), axis(1), axis(2));
        let mut points = Vec::with_capacity(xs.len() * ys.len() * zs.len());
        for &z in &zs {
            for &y in &ys {
                for &x in &xs {
                    points.push([x, y, z]);
                }
            }
        }
        let keep: Vec<bool> = points.par_iter().map(|p| distance_to_mesh(mesh, *p) > eps_mask).collect();
        let points = points.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect();
        EvaluationGrid { points, eps_mask }
    }

    /// Square grid in the plane `z = 0` for 2D meshes.
    pub fn square(mesh: &SurfaceMesh, half: f64, n: usize, eps_mask: f64) -> Self {
        Self::cartesian(mesh, [-half, -half, 0.0], [half, half, 0.0], [n, n, 1], eps_mask)
    }
}

/// Distance from `x` to the union of the mesh facets.
pub fn distance_to_mesh(mesh: &SurfaceMesh, x: Vec3) -> f64 {
    (0..mesh.num_facets())
        .map(|f| {
            let p = mesh.facet_points(f);
            if p.len() == 2 {
                g::point_segment_distance(x, p[0], p[1])
            } else {
                g::point_triangle_distance(x, p[0], p[1], p[2])
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Potential of a trace field at arbitrary points off Γ.
pub fn eval_dl_field(field: &TraceField, inflated: &InflatedMesh, points: &[Vec3]) -> Result<Vec<f64>> {
    let mesh = inflated.base();
    let tol = 1e-14 * mesh.bounding_diameter();
    let nodal: Vec<[f64; 3]> =
        (0..inflated.oriented_facets().len()).map(|t| field.nodal(inflated, t)).collect();
    points
        .par_iter()
        .map(|&x| {
            let mut u = 0.0;
            for (t, of) in inflated.oriented_facets().iter().enumerate() {
                let p = mesh.facet_points(of.facet);
                let val = if mesh.dim() == 2 {
                    segment_dl(x, &p, of.normal, &nodal[t], tol)
                } else {
                    triangle_dl(x, &p, of.normal, &nodal[t], tol)
                };
                u += val.ok_or(Error::PointOnScreen(x))?;
            }
            Ok(u)
        })
        .collect()
}

/// `U_h(x) = Σ_t ∫_t n_t·(y−x) / (c_d |x−y|^d) φ^t(y) dy` for a jump vector.
pub fn eval_dl(v: &[f64], inflated: &InflatedMesh, grid: &EvaluationGrid) -> Result<Vec<f64>> {
    let mesh = inflated.base();
    if let Some(p) = grid.points.iter().find(|p| distance_to_mesh(mesh, **p) <= grid.eps_mask) {
        return Err(Error::PointOnScreen(*p));
    }
    eval_dl_field(&expand(v, inflated)?, inflated, &grid.points)
}

/// Dipole potential of one segment with linear density; `None` on the segment.
fn segment_dl(x: Vec3, p: &[Vec3], n: Vec3, vals: &[f64; 3], tol: f64) -> Option<f64> {
    let (a, b) = (p[0], p[1]);
    let e = g::sub(b, a);
    let len = g::norm(e);
    let tau = g::scale(e, 1.0 / len);
    let r = g::sub(x, a);
    let s0 = g::dot(r, tau);
    let h = g::dot(r, n);
    let ra2 = g::dot(r, r);
    let rb = g::sub(x, b);
    let rb2 = g::dot(rb, rb);
    if h.abs() <= tol && s0 >= -tol && s0 <= len + tol {
        return None;
    }
    let theta = (h * len).atan2(h * h - s0 * (len - s0));
    let slope = (vals[1] - vals[0]) / len;
    let phi0 = vals[0] + slope * s0;
    Some(-(phi0 * theta + h * slope * 0.5 * (rb2 / ra2).ln()) / TWO_PI)
}

/// Dipole potential of one triangle with linear density; `None` on the triangle.
fn triangle_dl(x: Vec3, p: &[Vec3], n: Vec3, vals: &[f64; 3], tol: f64) -> Option<f64> {
    let nn = g::cross(g::sub(p[1], p[0]), g::sub(p[2], p[0]));
    let n2 = g::dot(nn, nn);
    let h = g::dot(g::sub(x, p[0]), n);
    if h.abs() <= tol && g::point_triangle_distance(x, p[0], p[1], p[2]) <= tol {
        return None;
    }
    let xp = g::sub(x, g::scale(n, h));
    // Linear density: value at the projection and in-plane gradient.
    let mut grad = [0.0; 3];
    for k in 0..3 {
        let gk = g::scale(g::cross(nn, g::sub(p[(k + 2) % 3], p[(k + 1) % 3])), 1.0 / n2);
        grad = g::add(grad, g::scale(gk, vals[k]));
    }
    let phi_p = vals[0] + g::dot(grad, g::sub(xp, p[0]));

    let r: [Vec3; 3] = [g::sub(p[0], x), g::sub(p[1], x), g::sub(p[2], x)];
    let l: [f64; 3] = [g::norm(r[0]), g::norm(r[1]), g::norm(r[2])];
    let num = g::dot(r[0], g::cross(r[1], r[2]));
    let den = l[0] * l[1] * l[2] + g::dot(r[0], r[1]) * l[2] + g::dot(r[0], r[2]) * l[1] + g::dot(r[1], r[2]) * l[0];
    // The triple product is negative when x is on the side of `nn`.
    let omega = -2.0 * num.atan2(den) * g::dot(n, nn).signum();

    // ∫_T (y − x_p)/r³ = −Σ_e ν_e ∫_e 1/r.
    let mut edge_sum = [0.0; 3];
    for k in 0..3 {
        let (a, b) = (p[(k + 1) % 3], p[(k + 2) % 3]);
        let e = g::sub(b, a);
        let elen = g::norm(e);
        let u = g::scale(e, 1.0 / elen);
        let mut nu = g::normalize(g::cross(e, nn));
        if g::dot(nu, g::sub(p[k], a)) > 0.0 {
            nu = g::scale(nu, -1.0);
        }
        let lm = g::dot(g::sub(a, x), u);
        let lp = g::dot(g::sub(b, x), u);
        let (rm, rp) = (l[(k + 1) % 3], l[(k + 2) % 3]);
        let ie = if lp + lm >= 0.0 {
            ((rp + lp) / (rm + lm)).ln()
        } else {
            ((rm - lm) / (rp - lp)).ln()
        };
        edge_sum = g::add(edge_sum, g::scale(nu, ie));
    }
    let inplane = -g::dot(grad, edge_sum);
    Some(-(phi_p * omega + h * inplane) / FOUR_PI)
}

/// Conformal map `w(z) = z + √(z²−1)` with `|w| > 1`, and the root used.
fn joukowski_inverse(z: Complex64) -> (Complex64, Complex64) {
    let mut s = ((z - 1.0) * (z + 1.0)).sqrt();
    if (z + s).norm() <= 1.0 {
        s = -s;
    }
    (z + s, s)
}

/// Exact slit solution `U = Re(−1/(2i w))` at a 2D point.
pub fn exact_plus_value(x: Vec3) -> Result<f64> {
    if x[1] == 0.0 && x[0].abs() <= 1.0 {
        return Err(Error::PointOnScreen(x));
    }
    let (w, _) = joukowski_inverse(Complex64::new(x[0], x[1]));
    Ok((-1.0 / (2.0 * Complex64::i() * w)).re)
}

/// Gradient of the exact slit solution.
pub fn exact_plus_gradient(x: Vec3) -> Result<Vec3> {
    let z = Complex64::new(x[0], x[1]);
    if (z * z - 1.0).norm() == 0.0 {
        return Err(Error::PointOnScreen(x));
    }
    let (w, s) = joukowski_inverse(z);
    let fp = -Complex64::i() / (2.0 * w * s);
    Ok([fp.re, -fp.im, 0.0])
}

/// Exact solution on every grid point.
pub fn exact_plus_solution(grid: &EvaluationGrid) -> Result<Vec<f64>> {
    grid.points.iter().map(|p| exact_plus_value(*p)).collect()
}

/// Root-mean-square difference.
pub fn grid_error(computed: &[f64], exact: &[f64]) -> Result<f64> {
    if computed.len() != exact.len() {
        return Err(Error::LengthMismatch { expected: exact.len(), got: computed.len() });
    }
    if computed.is_empty() {
        return Ok(0.0);
    }
    let s: f64 = computed.iter().zip(exact).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((s / computed.len() as f64).sqrt())
}

/// Potential jump `U(x + εn) − U(x − εn)` across oriented facet `t` at
/// barycentric coordinates `bary`, with `n` the normal of `t`.
pub fn jump_across(
    field: &TraceField,
    inflated: &InflatedMesh,
    t: usize,
    bary: &[f64],
    eps: f64,
) -> Result<f64> {
    let of = &inflated.oriented_facets()[t];
    let p = inflated.base().facet_points(of.facet);
    let mut x0 = [0.0; 3];
    for (pk, l) in p.iter().zip(bary) {
        x0 = g::add(x0, g::scale(*pk, *l));
    }
    let pts = [g::add(x0, g::scale(of.normal, eps)), g::sub(x0, g::scale(of.normal, eps))];
    let u = eval_dl_field(field, inflated, &pts)?;
    Ok(u[0] - u[1])
}
