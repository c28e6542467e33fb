//! Independent reference for Galerkin entries: closed-form inner
//! potentials of a facet combined with adaptive subdivision of the outer
//! facet.

#![allow(dead_code)]

use faer::Mat;
use screenbem_core::assembly::{assemble_v, assemble_w_from_v, surface_curl, QuadratureConfig};
use screenbem_core::jump::basis_trace;
use screenbem_core::mesh::{builtin, refine_uniform_times, SurfaceMesh};
use screenbem_core::multiscreen::{inflate, InflatedMesh};

pub type P = [f64; 3];

pub fn sub(a: P, b: P) -> P {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
pub fn dot(a: P, b: P) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
pub fn cross(a: P, b: P) -> P {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
pub fn norm(a: P) -> f64 {
    dot(a, a).sqrt()
}
pub fn unit(a: P) -> P {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}
pub fn mid(a: P, b: P) -> P {
    [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0]
}

/// ∫_T 1/|x − y| dy, classical edge-log / arctangent formula.
pub fn triangle_potential(x: P, t: &[P; 3]) -> f64 {
    let n = unit(cross(sub(t[1], t[0]), sub(t[2], t[0])));
    let d = dot(sub(x, t[0]), n);
    let ad = d.abs();
    let mut sum = 0.0;
    for i in 0..3 {
        let pm = t[i];
        let pp = t[(i + 1) % 3];
        let opp = t[(i + 2) % 3];
        let s = unit(sub(pp, pm));
        let mut m = cross(s, n);
        if dot(m, sub(opp, pm)) > 0.0 {
            m = [-m[0], -m[1], -m[2]];
        }
        let t0 = dot(sub(pm, x), m);
        let sm = dot(sub(pm, x), s);
        let sp = dot(sub(pp, x), s);
        let rm = norm(sub(pm, x));
        let rp = norm(sub(pp, x));
        let r0sq = t0 * t0 + d * d;
        let log = if sp + sm >= 0.0 {
            ((rp + sp) / (rm + sm)).ln()
        } else {
            ((rm - sm) / (rp - sp)).ln()
        };
        if t0.abs() > 0.0 {
            sum += t0 * log;
        }
        if ad > 0.0 {
            sum -= ad * ((t0 * sp / (r0sq + ad * rp)).atan() - (t0 * sm / (r0sq + ad * rm)).atan());
        }
    }
    sum
}

/// ∫_a^b ln|x − y| dy along a segment.
pub fn segment_log_potential(x: P, a: P, b: P) -> f64 {
    let len = norm(sub(b, a));
    let e = unit(sub(b, a));
    let s1 = dot(sub(a, x), e);
    let s2 = s1 + len;
    let h = norm(sub(sub(a, x), [e[0] * s1, e[1] * s1, e[2] * s1]));
    let f = |s: f64| {
        if h == 0.0 {
            if s == 0.0 {
                0.0
            } else {
                s * s.abs().ln() - s
            }
        } else {
            0.5 * s * (s * s + h * h).ln() - s + h * (s / h).atan()
        }
    };
    f(s2) - f(s1)
}

pub const DUNAVANT: [([f64; 3], f64); 6] = [
    ([0.445948490915965, 0.445948490915965, 0.108103018168070], 0.223381589678011),
    ([0.445948490915965, 0.108103018168070, 0.445948490915965], 0.223381589678011),
    ([0.108103018168070, 0.445948490915965, 0.445948490915965], 0.223381589678011),
    ([0.091576213509771, 0.091576213509771, 0.816847572980459], 0.109951743655322),
    ([0.091576213509771, 0.816847572980459, 0.091576213509771], 0.109951743655322),
    ([0.816847572980459, 0.091576213509771, 0.091576213509771], 0.109951743655322),
];

pub fn tri_rule(t: &[P; 3], f: &dyn Fn(P) -> f64) -> f64 {
    let area = 0.5 * norm(cross(sub(t[1], t[0]), sub(t[2], t[0])));
    DUNAVANT
        .iter()
        .map(|(l, w)| {
            let x = [
                l[0] * t[0][0] + l[1] * t[1][0] + l[2] * t[2][0],
                l[0] * t[0][1] + l[1] * t[1][1] + l[2] * t[2][1],
                l[0] * t[0][2] + l[1] * t[1][2] + l[2] * t[2][2],
            ];
            w * f(x)
        })
        .sum::<f64>()
        * area
}

pub fn adaptive_tri(t: &[P; 3], f: &dyn Fn(P) -> f64, coarse: f64, tol: f64, depth: usize) -> f64 {
    let (ab, bc, ca) = (mid(t[0], t[1]), mid(t[1], t[2]), mid(t[2], t[0]));
    let kids = [[t[0], ab, ca], [ab, t[1], bc], [ca, bc, t[2]], [bc, ca, ab]];
    let vals: Vec<f64> = kids.iter().map(|k| tri_rule(k, f)).collect();
    let fine: f64 = vals.iter().sum();
    if depth >= 2 && ((fine - coarse).abs() < tol || depth > 8) {
        return fine;
    }
    kids.iter().zip(&vals).map(|(k, v)| adaptive_tri(k, f, *v, tol / 2.0, depth + 1)).sum()
}

pub fn gauss5() -> [(f64, f64); 5] {
    let a = (245.0 - 14.0 * (70.0f64).sqrt()).sqrt() / 21.0;
    let b = (245.0 + 14.0 * (70.0f64).sqrt()).sqrt() / 21.0;
    let wa = (322.0 + 13.0 * (70.0f64).sqrt()) / 900.0;
    let wb = (322.0 - 13.0 * (70.0f64).sqrt()) / 900.0;
    [(-b, wb), (-a, wa), (0.0, 128.0 / 225.0), (a, wa), (b, wb)]
}

pub fn seg_rule(a: P, b: P, f: &dyn Fn(P) -> f64) -> f64 {
    let len = norm(sub(b, a));
    gauss5()
        .iter()
        .map(|(x, w)| {
            let t = 0.5 * (1.0 + x);
            w * 0.5 * f([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), 0.0])
        })
        .sum::<f64>()
        * len
}

pub fn adaptive_seg(a: P, b: P, f: &dyn Fn(P) -> f64, coarse: f64, tol: f64, depth: usize) -> f64 {
    let m = mid(a, b);
    let (l, r) = (seg_rule(a, m, f), seg_rule(m, b, f));
    if depth >= 2 && ((l + r - coarse).abs() < tol || depth > 40) {
        return l + r;
    }
    adaptive_seg(a, m, f, l, tol / 2.0, depth + 1) + adaptive_seg(m, b, f, r, tol / 2.0, depth + 1)
}

/// Reference `∬_{T×T'} G` for a pair of facets.
pub fn oracle_pair(mesh: &SurfaceMesh, a: usize, b: usize) -> f64 {
    let pa = mesh.facet_points(a);
    let pb = mesh.facet_points(b);
    if mesh.dim() == 3 {
        let ta = [pa[0], pa[1], pa[2]];
        let tb = [pb[0], pb[1], pb[2]];
        let f = |x: P| triangle_potential(x, &tb);
        let c = tri_rule(&ta, &f);
        adaptive_tri(&ta, &f, c, 1e-9 * c.abs(), 0) / (4.0 * std::f64::consts::PI)
    } else {
        let f = |x: P| segment_log_potential(x, pb[0], pb[1]);
        let c = seg_rule(pa[0], pa[1], &f);
        -adaptive_seg(pa[0], pa[1], &f, c, 1e-11 * c.abs().max(1e-3), 0) / (2.0 * std::f64::consts::PI)
    }
}

pub fn oracle_v(mesh: &SurfaceMesh) -> Mat<f64> {
    let n = mesh.num_facets();
    let mut v = Mat::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            v[(a, b)] = oracle_pair(mesh, a, b);
        }
    }
    v
}

/// W from pairs of oriented facets and per-basis traces.
pub fn oracle_w(inf: &InflatedMesh, v: &Mat<f64>) -> Mat<f64> {
    let n = inf.num_dofs();
    let nt = inf.oriented_facets().len();
    let curls: Vec<Vec<P>> = inf
        .jump_dofs()
        .iter()
        .map(|&d| {
            let f = basis_trace(d, inf).unwrap();
            (0..nt).map(|t| surface_curl(inf, t, &f)).collect()
        })
        .collect();
    let mut w = Mat::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let mut s = 0.0;
            for t in 0..nt {
                for tp in 0..nt {
                    s += dot(curls[a][t], curls[b][tp]) * v[(t / 2, tp / 2)];
                }
            }
            w[(a, b)] = s;
        }
    }
    w
}

pub fn max_abs(m: &Mat<f64>) -> f64 {
    let mut x: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            x = x.max(m[(i, j)].abs());
        }
    }
    x
}

/// Largest entrywise relative error of the assembled `V` against the oracle.
pub fn v_entry_error(mesh: &SurfaceMesh) -> (f64, Mat<f64>) {
    let v = assemble_v(mesh, &QuadratureConfig::default()).unwrap();
    let o = oracle_v(mesh);
    let mut worst: f64 = 0.0;
    for a in 0..mesh.num_facets() {
        for b in 0..mesh.num_facets() {
            worst = worst.max((v[(a, b)] - o[(a, b)]).abs() / o[(a, b)].abs());
        }
    }
    (worst, o)
}

/// `max |W - W_oracle| / max |W_oracle|`.
pub fn w_error(mesh: &SurfaceMesh, oracle: &Mat<f64>) -> f64 {
    let inf = inflate(mesh).unwrap();
    let v = assemble_v(mesh, &QuadratureConfig::default()).unwrap();
    let w = assemble_w_from_v(&inf, &v).unwrap();
    let wo = oracle_w(&inf, oracle);
    let mut diff = Mat::zeros(w.nrows(), w.ncols());
    for i in 0..w.nrows() {
        for j in 0..w.ncols() {
            diff[(i, j)] = w[(i, j)] - wo[(i, j)];
        }
    }
    max_abs(&diff) / max_abs(&wo)
}

pub fn bowtie_patch() -> SurfaceMesh {
    let fine = refine_uniform_times(&builtin("bowtie").unwrap(), 1).fine;
    let m = [0.0, 0.0, 0.25 * 3f64.sqrt()];
    let mid_child = |f: usize| f % 4 == 3;
    let mut keep = Vec::new();
    for f in 0..fine.num_facets() {
        let has_m = fine.facet(f).iter().any(|&v| norm(sub(fine.vertex(v), m)) < 1e-14);
        // Drop the middle child of the first two coarse triangles.
        if has_m && !(mid_child(f) && f / 4 < 2) {
            keep.push(fine.facet(f).to_vec());
        }
    }
    assert_eq!(keep.len(), 10);
    SurfaceMesh::new(3, fine.vertices().to_vec(), keep).unwrap()
}
