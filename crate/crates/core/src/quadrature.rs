//! Quadrature rules: Gauss–Legendre, collapsed triangle rules, the
//! Sauter–Schwab rules for adjacent triangle pairs, and closed-form
//! logarithmic integrals over segments.

use std::f64::consts::PI;

use crate::geometry::{self as g, Vec3};

/// `n`-point Gauss–Legendre rule on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss rule needs at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

/// A rule on the unit triangle given by barycentric points; weights sum to 1.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub bary: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Collapsed `n x n` Gauss rule.
    pub fn collapsed(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut bary = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (u, wu) in x.iter().zip(&w) {
            for (v, wv) in x.iter().zip(&w) {
                bary.push([1.0 - u, u * (1.0 - v), u * v]);
                weights.push(2.0 * wu * wv * u);
            }
        }
        TriangleRule { bary, weights }
    }

    pub fn points(&self, tri: &[Vec3]) -> Vec<Vec3> {
        self.bary
            .iter()
            .map(|l| {
                g::add(g::add(g::scale(tri[0], l[0]), g::scale(tri[1], l[1])), g::scale(tri[2], l[2]))
            })
            .collect()
    }
}

/// A rule on the reference triangle pair `T̂ x T̂` with
/// `T̂ = {0 <= x2 <= x1 <= 1}` (area 1/2), stored as points in reference
/// coordinates; weights integrate over `T̂ x T̂` (total `1/4`).
#[derive(Clone, Debug, Default)]
pub struct PairRule {
    pub x: Vec<[f64; 2]>,
    pub y: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

/// Adjacency of two triangles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Adjacency {
    Identical,
    Edge,
    Vertex,
    Disjoint,
}

/// The Sauter–Schwab rules with `n` Gauss points per parameter direction.
#[derive(Clone, Debug)]
pub struct SingularRules {
    pub identical: PairRule,
    pub edge: PairRule,
    pub vertex: PairRule,
}

impl SingularRules {
    pub fn new(n: usize) -> Self {
        let (gx, gw) = gauss_legendre(n);
        let mut identical = PairRule::default();
        let mut edge = PairRule::default();
        let mut vertex = PairRule::default();
        for (a, &xi) in gx.iter().enumerate() {
            for (b, &e1) in gx.iter().enumerate() {
                for (c, &e2) in gx.iter().enumerate() {
                    for (d, &e3) in gx.iter().enumerate() {
                        let w = gw[a] * gw[b] * gw[c] * gw[d];

                        let jac = w * xi.powi(3) * e1 * e1 * e2;
                        let r1 = ([xi, xi * (1.0 - e1 + e1 * e2)], [xi * (1.0 - e1 * e2 * e3), xi * (1.0 - e1)]);
                        let r3 = (
                            [xi, xi * e1 * (1.0 - e2 + e2 * e3)],
                            [xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2)],
                        );
                        let r5 = (
                            [xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3)],
                            [xi, xi * e1 * (1.0 - e2)],
                        );
                        for (p, q) in [r1, r3, r5] {
                            identical.push(p, q, jac);
                            identical.push(q, p, jac);
                        }

                        let jac1 = w * xi.powi(3) * e1 * e1;
                        edge.push([xi, xi * e1 * e3], [xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2)], jac1);
                        let jac2 = w * xi.powi(3) * e1 * e1 * e2;
                        edge.push([xi, xi * e1], [xi * (1.0 - e1 * e2 * e3), xi * e1 * e2 * (1.0 - e3)], jac2);
                        edge.push([xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2)], [xi, xi * e1 * e2 * e3], jac2);
                        edge.push([xi * (1.0 - e1 * e2 * e3), xi * e1 * e2 * (1.0 - e3)], [xi, xi * e1], jac2);
                        edge.push([xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3)], [xi, xi * e1 * e2], jac2);

                        let jacv = w * xi.powi(3) * e2;
                        vertex.push([xi, xi * e1], [xi * e2, xi * e2 * e3], jacv);
                        vertex.push([xi * e2, xi * e2 * e3], [xi, xi * e1], jacv);
                    }
                }
            }
        }
        SingularRules { identical, edge, vertex }
    }

    pub fn rule(&self, adj: Adjacency) -> &PairRule {
        match adj {
            Adjacency::Identical => &self.identical,
            Adjacency::Edge => &self.edge,
            Adjacency::Vertex => &self.vertex,
            Adjacency::Disjoint => panic!("no singular rule for disjoint pairs"),
        }
    }
}

impl PairRule {
    fn push(&mut self, x: [f64; 2], y: [f64; 2], w: f64) {
        self.x.push(x);
        self.y.push(y);
        self.weights.push(w);
    }
}

/// Reference map `x̂ ↦ A + x̂1 (B − A) + x̂2 (C − B)` onto triangle `[A, B, C]`.
#[inline]
pub fn ref_map(tri: &[Vec3; 3], p: [f64; 2]) -> Vec3 {
    let mut out = [0.0; 3];
    for k in 0..3 {
        out[k] = tri[0][k] + p[0] * (tri[1][k] - tri[0][k]) + p[1] * (tri[2][k] - tri[1][k]);
    }
    out
}

/// `∫_0^L ln|p − (a + s d)| ds` for a unit direction `d`.
pub fn log_segment_integral(p: Vec3, a: Vec3, d: Vec3, len: f64) -> f64 {
    let r = g::sub(p, a);
    let s0 = g::dot(r, d);
    let h = g::norm(g::sub(r, g::scale(d, s0)));
    let prim = |x: f64| -> f64 {
        if h > 0.0 {
            0.5 * x * (x * x + h * h).ln() - x + h * (x / h).atan()
        } else if x != 0.0 {
            x * x.abs().ln() - x
        } else {
            0.0
        }
    };
    prim(len - s0) - prim(-s0)
}

/// `∫_s ∫_s ln|x − y|` over a segment of length `len`.
pub fn log_self_integral(len: f64) -> f64 {
    len * len * (len.ln() - 1.5)
}

/// `∫_{s1} ∫_{s2} ln|x − y|` for two segments sharing the endpoint `v`,
/// with other endpoints `a` and `b`.
pub fn log_vertex_integral(v: Vec3, a: Vec3, b: Vec3) -> f64 {
    let da = g::sub(a, v);
    let db = g::sub(b, v);
    let (la, lb) = (g::norm(da), g::norm(db));
    // Duffy split along the diagonal of the parameter square: the `ln u`
    // part integrates to −1/4 on each half, the remainder is the log
    // potential of an endpoint against the other segment.
    let i1 = log_segment_integral(a, v, g::scale(db, 1.0 / lb), lb) / lb;
    let i2 = log_segment_integral(b, v, g::scale(da, 1.0 / la), la) / la;
    la * lb * (-0.5 + 0.5 * (i1 + i2))
}
