//! Simplicial screen meshes: segments in 2D, triangles in 3D.
//!
//! A [`SurfaceMesh`] is validated on construction (ids, degeneracy,
//! duplicates and conformity), so every other module can assume a
//! conforming simplicial mesh. Nested refinements are produced as
//! [`MeshLevelPair`]s carrying the fine-to-coarse parent map.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{self as g, Vec3};

/// Relative tolerance used for geometric predicates (scaled by mesh diameter).
const GEOM_TOL: f64 = 1e-10;
/// Relative tolerance below which a facet is considered degenerate.
const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceMesh {
    dim: usize,
    vertices: Vec<Vec3>,
    facets: Vec<[usize; 3]>,
    tags: Option<Vec<i64>>,
}

impl SurfaceMesh {
    /// Builds and validates a mesh. In 2D the facets are segments and only
    /// the first two ids of each facet are used; vertices must have `z = 0`.
    pub fn new(dim: usize, vertices: Vec<Vec3>, facets: Vec<Vec<usize>>) -> Result<Self> {
        Self::with_tags(dim, vertices, facets, None)
    }

    pub fn with_tags(
        dim: usize,
        vertices: Vec<Vec3>,
        facets: Vec<Vec<usize>>,
        tags: Option<Vec<i64>>,
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidMesh(format!("ambient dimension {dim} not in {{2, 3}}")));
        }
        let mut packed = Vec::with_capacity(facets.len());
        for (f, ids) in facets.iter().enumerate() {
            if ids.len() != dim {
                return Err(Error::InvalidMesh(format!(
                    "facet {f} has {} vertices, expected {dim}",
                    ids.len()
                )));
            }
            let mut arr = [usize::MAX; 3];
            arr[..dim].copy_from_slice(ids);
            packed.push(arr);
        }
        if let Some(t) = &tags {
            if t.len() != facets.len() {
                return Err(Error::InvalidMesh("tag count differs from facet count".into()));
            }
        }
        let mesh = SurfaceMesh { dim, vertices, facets: packed, tags };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Vec3 {
        self.vertices[i]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    /// Vertex ids of facet `f` (2 in 2D, 3 in 3D).
    pub fn facet(&self, f: usize) -> &[usize] {
        &self.facets[f][..self.dim]
    }

    pub fn facets(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.facets.iter().map(move |f| &f[..self.dim])
    }

    pub fn tags(&self) -> Option<&[i64]> {
        self.tags.as_deref()
    }

    pub fn facet_points(&self, f: usize) -> Vec<Vec3> {
        self.facet(f).iter().map(|&v| self.vertices[v]).collect()
    }

    /// Length (2D) or area (3D) of facet `f`.
    pub fn facet_measure(&self, f: usize) -> f64 {
        let p = self.facet_points(f);
        match self.dim {
            2 => g::dist(p[0], p[1]),
            _ => 0.5 * g::norm(g::cross(g::sub(p[1], p[0]), g::sub(p[2], p[0]))),
        }
    }

    /// Longest edge of facet `f`.
    pub fn facet_diameter(&self, f: usize) -> f64 {
        let p = self.facet_points(f);
        let mut d: f64 = 0.0;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                d = d.max(g::dist(p[i], p[j]));
            }
        }
        d
    }

    /// Unit normal of facet `f` from its vertex ordering. In 2D this is the
    /// segment direction rotated by +90 degrees in the plane.
    pub fn facet_normal(&self, f: usize) -> Vec3 {
        let p = self.facet_points(f);
        match self.dim {
            2 => g::normalize(g::perp2(g::sub(p[1], p[0]))),
            _ => g::normalize(g::cross(g::sub(p[1], p[0]), g::sub(p[2], p[0]))),
        }
    }

    pub fn facet_centroid(&self, f: usize) -> Vec3 {
        g::centroid(&self.facet_points(f))
    }

    /// Maximal facet diameter.
    pub fn mesh_size(&self) -> f64 {
        (0..self.num_facets()).map(|f| self.facet_diameter(f)).fold(0.0, f64::max)
    }

    /// Diameter of the vertex cloud's bounding box.
    pub fn bounding_diameter(&self) -> f64 {
        let (lo, hi) = bbox(&self.vertices);
        g::dist(lo, hi)
    }

    /// Facets incident to each vertex.
    pub fn vertex_facets(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_vertices()];
        for (f, ids) in self.facets().enumerate() {
            for &v in ids {
                out[v].push(f);
            }
        }
        out
    }

    /// Codimension-one faces (vertices in 2D, edges in 3D) with their
    /// incident facets. Keys are sorted vertex ids.
    pub fn faces(&self) -> BTreeMap<Vec<usize>, Vec<usize>> {
        let mut map: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (f, ids) in self.facets().enumerate() {
            for skip in 0..ids.len() {
                let mut face: Vec<usize> =
                    ids.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v).collect();
                face.sort_unstable();
                map.entry(face).or_default().push(f);
            }
        }
        map
    }

    /// Faces of the boundary mesh: codimension-one faces that occur in
    /// exactly one facet.
    pub fn boundary(&self) -> Vec<Vec<usize>> {
        self.faces()
            .into_iter()
            .filter(|(_, inc)| inc.len() == 1)
            .map(|(face, _)| face)
            .collect()
    }

    /// Vertices lying on the boundary mesh.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut vs: Vec<usize> = self.boundary().into_iter().flatten().collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        for (i, v) in self.vertices.iter().enumerate() {
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidMesh(format!("vertex {i} has non-finite coordinates")));
            }
            if self.dim == 2 && v[2] != 0.0 {
                return Err(Error::InvalidMesh(format!("2D vertex {i} has nonzero z")));
            }
        }
        let diam = self.bounding_diameter().max(f64::MIN_POSITIVE);
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        for (f, ids) in self.facets().enumerate() {
            for &v in ids {
                if v >= nv {
                    return Err(Error::InvalidMesh(format!("facet {f} references vertex {v} >= {nv}")));
                }
            }
            let mut key = ids.to_vec();
            key.sort_unstable();
            if key.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidMesh(format!("facet {f} repeats a vertex")));
            }
            if let Some(prev) = seen.insert(key, f) {
                return Err(Error::InvalidMesh(format!("facets {prev} and {f} are duplicates")));
            }
            let measure = self.facet_measure(f);
            let threshold = DEGENERATE_TOL * diam.powi(self.dim as i32 - 1);
            if measure <= threshold {
                return Err(Error::InvalidMesh(format!("facet {f} is degenerate")));
            }
        }
        self.check_conformity(diam)
    }

    fn check_conformity(&self, diam: f64) -> Result<()> {
        let tol = GEOM_TOL * diam;
        let boxes: Vec<(Vec3, Vec3)> = (0..self.num_facets())
            .map(|f| bbox(&self.facet_points(f)))
            .collect();
        let mut order: Vec<usize> = (0..self.num_facets()).collect();
        order.sort_by(|&a, &b| boxes[a].0[0].total_cmp(&boxes[b].0[0]));
        for (k, &a) in order.iter().enumerate() {
            for &b in &order[k + 1..] {
                if boxes[b].0[0] > boxes[a].1[0] + tol {
                    break;
                }
                if !boxes_overlap(&boxes[a], &boxes[b], tol) {
                    continue;
                }
                if !self.pair_conforms(a, b, tol) {
                    return Err(Error::InvalidMesh(format!(
                        "facets {a} and {b} violate conformity"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Checks that `|a| ∩ |b|` is the hull of the shared vertices.
    fn pair_conforms(&self, a: usize, b: usize, tol: f64) -> bool {
        let fa = self.facet(a);
        let fb = self.facet(b);
        let shared: Vec<usize> = fa.iter().copied().filter(|v| fb.contains(v)).collect();
        let pa = self.facet_points(a);
        let pb = self.facet_points(b);
        if self.dim == 2 {
            match shared.len() {
                0 => segment_segment_distance(pa[0], pa[1], pb[0], pb[1]) > tol,
                _ => {
                    let v = shared[0];
                    let other = |ids: &[usize]| if ids[0] == v { ids[1] } else { ids[0] };
                    let da = g::sub(self.vertices[other(fa)], self.vertices[v]);
                    let db = g::sub(self.vertices[other(fb)], self.vertices[v]);
                    let c = da[0] * db[1] - da[1] * db[0];
                    !(c.abs() <= tol * g::norm(da).max(g::norm(db)) && g::dot(da, db) > 0.0)
                }
            }
        } else {
            match shared.len() {
                0 => triangles_disjoint(&pa, &pb, tol),
                1 => {
                    let v = shared[0];
                    let origin = self.vertices[v];
                    let sector = |ids: &[usize]| -> (Vec3, Vec3) {
                        let o: Vec<usize> = ids.iter().copied().filter(|&x| x != v).collect();
                        (
                            g::sub(self.vertices[o[0]], origin),
                            g::sub(self.vertices[o[1]], origin),
                        )
                    };
                    !sectors_overlap(sector(fa), sector(fb), tol)
                }
                _ => {
                    let third = |ids: &[usize]| ids.iter().copied().find(|x| !shared.contains(x)).unwrap();
                    let e0 = self.vertices[shared[0]];
                    let e = g::sub(self.vertices[shared[1]], e0);
                    let ua = g::sub(self.vertices[third(fa)], e0);
                    let ub = g::sub(self.vertices[third(fb)], e0);
                    // Components orthogonal to the shared edge.
                    let en = g::normalize(e);
                    let wa = g::sub(ua, g::scale(en, g::dot(ua, en)));
                    let wb = g::sub(ub, g::scale(en, g::dot(ub, en)));
                    let c = g::norm(g::cross(wa, wb));
                    !(c <= tol * g::norm(wa).max(g::norm(wb)) && g::dot(wa, wb) > 0.0)
                }
            }
        }
    }

    /// Rebuilds the mesh with new vertex positions (same connectivity).
    pub fn with_vertices(&self, vertices: Vec<Vec3>) -> Result<Self> {
        let facets = self.facets().map(|f| f.to_vec()).collect();
        Self::with_tags(self.dim, vertices, facets, self.tags.clone())
    }

    /// Writes the ASCII mesh format read by [`load_mesh`].
    pub fn write_ascii(&self) -> String {
        let mut s = format!("{} {} {}\n", self.dim, self.num_vertices(), self.num_facets());
        for v in &self.vertices {
            if self.dim == 2 {
                s += &format!("{:.17e} {:.17e}\n", v[0], v[1]);
            } else {
                s += &format!("{:.17e} {:.17e} {:.17e}\n", v[0], v[1], v[2]);
            }
        }
        for (f, ids) in self.facets().enumerate() {
            let mut line: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
            if let Some(t) = &self.tags {
                line.push(t[f].to_string());
            }
            s += &line.join(" ");
            s.push('\n');
        }
        s
    }
}

fn bbox(points: &[Vec3]) -> (Vec3, Vec3) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

fn boxes_overlap(a: &(Vec3, Vec3), b: &(Vec3, Vec3), tol: f64) -> bool {
    (0..3).all(|k| a.0[k] <= b.1[k] + tol && b.0[k] <= a.1[k] + tol)
}

/// Minimal distance between segments `[p1, q1]` and `[p2, q2]`.
pub(crate) fn segment_segment_distance(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> f64 {
    let d1 = g::sub(q1, p1);
    let d2 = g::sub(q2, p2);
    let r = g::sub(p1, p2);
    let a = g::dot(d1, d1);
    let e = g::dot(d2, d2);
    let f = g::dot(d2, r);
    let c = g::dot(d1, r);
    let b = g::dot(d1, d2);
    let denom = a * e - b * b;
    let mut s = if denom > 1e-300 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    g::dist(g::add(p1, g::scale(d1, s)), g::add(p2, g::scale(d2, t)))
}

fn segment_hits_triangle(p: Vec3, q: Vec3, tri: &[Vec3], tol: f64) -> bool {
    let n = g::cross(g::sub(tri[1], tri[0]), g::sub(tri[2], tri[0]));
    let nn = g::normalize(n);
    let dp = g::dot(g::sub(p, tri[0]), nn);
    let dq = g::dot(g::sub(q, tri[0]), nn);
    if (dp > tol && dq > tol) || (dp < -tol && dq < -tol) {
        return false;
    }
    if (dp - dq).abs() <= tol {
        // Segment parallel to the plane; coplanar overlaps are caught by
        // the vertex/edge distance tests.
        return false;
    }
    let t = dp / (dp - dq);
    let x = g::lerp(p, q, t);
    g::point_triangle_distance(x, tri[0], tri[1], tri[2]) <= tol
}

fn triangles_disjoint(a: &[Vec3], b: &[Vec3], tol: f64) -> bool {
    for i in 0..3 {
        if g::point_triangle_distance(a[i], b[0], b[1], b[2]) <= tol
            || g::point_triangle_distance(b[i], a[0], a[1], a[2]) <= tol
        {
            return false;
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            if segment_segment_distance(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3]) <= tol {
                return false;
            }
        }
    }
    for i in 0..3 {
        if segment_hits_triangle(a[i], a[(i + 1) % 3], b, tol)
            || segment_hits_triangle(b[i], b[(i + 1) % 3], a, tol)
        {
            return false;
        }
    }
    true
}

/// Whether `u` lies in the closed planar cone spanned by `e1, e2`.
fn in_cone(u: Vec3, e1: Vec3, e2: Vec3, tol: f64) -> bool {
    // Solve u = a e1 + b e2 in the least-squares sense and check the residual.
    let g11 = g::dot(e1, e1);
    let g12 = g::dot(e1, e2);
    let g22 = g::dot(e2, e2);
    let r1 = g::dot(u, e1);
    let r2 = g::dot(u, e2);
    let det = g11 * g22 - g12 * g12;
    let a = (g22 * r1 - g12 * r2) / det;
    let b = (g11 * r2 - g12 * r1) / det;
    let res = g::sub(u, g::add(g::scale(e1, a), g::scale(e2, b)));
    let scale = g::norm(u);
    g::norm(res) <= tol * scale && a >= -tol && b >= -tol
}

/// Whether two triangle corners at a common apex share more than the apex.
fn sectors_overlap(sa: (Vec3, Vec3), sb: (Vec3, Vec3), tol: f64) -> bool {
    let na = g::cross(sa.0, sa.1);
    let nb = g::cross(sb.0, sb.1);
    let line = g::cross(na, nb);
    let scale = g::norm(na) * g::norm(nb);
    if g::norm(line) <= 1e-8 * scale {
        // Coplanar corners overlap iff one contains a direction of the other
        // or their edges cross.
        let probe = |u: Vec3, e: (Vec3, Vec3)| in_cone(u, e.0, e.1, 1e-9);
        let mid_a = g::add(g::normalize(sa.0), g::normalize(sa.1));
        let mid_b = g::add(g::normalize(sb.0), g::normalize(sb.1));
        return probe(sb.0, sa)
            || probe(sb.1, sa)
            || probe(sa.0, sb)
            || probe(sa.1, sb)
            || probe(mid_a, sb)
            || probe(mid_b, sa);
    }
    let _ = tol;
    let d = g::normalize(line);
    let nd = g::scale(d, -1.0);
    (in_cone(d, sa.0, sa.1, 1e-9) && in_cone(d, sb.0, sb.1, 1e-9))
        || (in_cone(nd, sa.0, sa.1, 1e-9) && in_cone(nd, sb.0, sb.1, 1e-9))
}

/// A coarse mesh and a nested refinement of it.
#[derive(Clone, Debug)]
pub struct MeshLevelPair {
    pub coarse: SurfaceMesh,
    pub fine: SurfaceMesh,
    /// `parent[f]` is the coarse facet containing fine facet `f`.
    pub parent: Vec<usize>,
    /// Coarse mesh size.
    pub coarse_h: f64,
    /// Fine mesh size.
    pub fine_h: f64,
}

impl MeshLevelPair {
    /// The trivial pair `(mesh, mesh)` with identity parent map.
    pub fn identity(mesh: &SurfaceMesh) -> Self {
        let h = mesh.mesh_size();
        MeshLevelPair {
            coarse: mesh.clone(),
            fine: mesh.clone(),
            parent: (0..mesh.num_facets()).collect(),
            coarse_h: h,
            fine_h: h,
        }
    }

    /// `H / h`.
    pub fn ratio(&self) -> f64 {
        self.coarse_h / self.fine_h
    }

    /// Refines the fine level once more, keeping the coarse level.
    pub fn refine_fine(&self) -> MeshLevelPair {
        let step = refine_uniform(&self.fine);
        MeshLevelPair {
            coarse: self.coarse.clone(),
            parent: step.parent.iter().map(|&p| self.parent[p]).collect(),
            fine: step.fine,
            coarse_h: self.coarse_h,
            fine_h: step.fine_h,
        }
    }

    /// Checks that every fine facet lies in its parent's convex hull.
    pub fn check_nesting(&self) -> Result<()> {
        let tol = 1e-12 * self.coarse.bounding_diameter().max(1.0);
        if self.parent.len() != self.fine.num_facets() {
            return Err(Error::Nesting("parent map length differs from fine facet count".into()));
        }
        for (f, &p) in self.parent.iter().enumerate() {
            let hull = self.coarse.facet_points(p);
            for &v in self.fine.facet(f) {
                let x = self.fine.vertex(v);
                if !point_in_facet(x, &hull, tol) {
                    return Err(Error::Nesting(format!(
                        "fine facet {f} leaves its parent {p}"
                    )));
                }
            }
        }
        if self.coarse_h < self.fine_h || self.fine_h <= 0.0 {
            return Err(Error::Nesting("mesh sizes violate H >= h > 0".into()));
        }
        Ok(())
    }
}

/// Whether `x` lies in the convex hull of the facet vertices, within `tol`.
pub fn point_in_facet(x: Vec3, verts: &[Vec3], tol: f64) -> bool {
    match verts.len() {
        2 => g::point_segment_distance(x, verts[0], verts[1]) <= tol,
        _ => g::point_triangle_distance(x, verts[0], verts[1], verts[2]) <= tol,
    }
}

/// One level of uniform refinement: segments are bisected, triangles are
/// split into four by their edge midpoints. Coarse vertices keep their ids.
pub fn refine_uniform(mesh: &SurfaceMesh) -> MeshLevelPair {
    let mut vertices = mesh.vertices.clone();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoints.entry(key).or_insert_with(|| {
            // Average with a fixed operand order so the midpoint is
            // independent of the edge direction.
            let p = g::scale(g::add(vertices[key.0], vertices[key.1]), 0.5);
            vertices.push(p);
            vertices.len() - 1
        })
    };
    let mut facets = Vec::new();
    let mut parent = Vec::new();
    let mut tags = mesh.tags.as_ref().map(|_| Vec::new());
    for (f, ids) in mesh.facets().enumerate() {
        let children: Vec<Vec<usize>> = if mesh.dim == 2 {
            let m = mid(ids[0], ids[1], &mut vertices);
            vec![vec![ids[0], m], vec![m, ids[1]]]
        } else {
            let (a, b, c) = (ids[0], ids[1], ids[2]);
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            vec![vec![a, ab, ca], vec![ab, b, bc], vec![ca, bc, c], vec![bc, ca, ab]]
        };
        for child in children {
            facets.push(child);
            parent.push(f);
            if let (Some(t), Some(src)) = (tags.as_mut(), mesh.tags.as_ref()) {
                t.push(src[f]);
            }
        }
    }
    let mut packed = Vec::with_capacity(facets.len());
    for ids in facets {
        let mut arr = [usize::MAX; 3];
        arr[..mesh.dim].copy_from_slice(&ids);
        packed.push(arr);
    }
    // Children of a conforming mesh are conforming by construction, so the
    // quadratic validation pass is skipped here; tests re-validate.
    let fine = SurfaceMesh { dim: mesh.dim, vertices, facets: packed, tags };
    MeshLevelPair {
        coarse_h: mesh.mesh_size(),
        fine_h: fine.mesh_size(),
        coarse: mesh.clone(),
        fine,
        parent,
    }
}

/// Refines `levels` times, returning the pair (mesh, refined mesh).
pub fn refine_uniform_times(mesh: &SurfaceMesh, levels: usize) -> MeshLevelPair {
    let mut pair = MeshLevelPair::identity(mesh);
    for _ in 0..levels {
        pair = pair.refine_fine();
    }
    pair
}

/// Re-validates a mesh built internally (used by tests and after loading).
pub fn revalidate(mesh: &SurfaceMesh) -> Result<()> {
    mesh.validate()
}

/// Algebraic grading of a 2D mesh toward the given corners.
///
/// The mesh is decomposed into arms (maximal vertex chains whose interior
/// vertices have degree two). On an arm with `n` segments and a corner at
/// one end, node `k` (counted from the corner) is moved to arc length
/// `L (k/n)^exponent` from the corner. Arms with corners at both ends are
/// graded symmetrically toward both. Connectivity is unchanged.
pub fn refine_graded(mesh: &SurfaceMesh, corners: &[Vec3], exponent: f64) -> Result<SurfaceMesh> {
    if mesh.dim != 2 {
        return Err(Error::InvalidArgument("graded refinement is implemented for 2D meshes".into()));
    }
    if !(exponent >= 1.0) {
        return Err(Error::InvalidArgument(format!("grading exponent {exponent} < 1")));
    }
    let tol = GEOM_TOL * mesh.bounding_diameter();
    let boundary = mesh.boundary_vertices();
    let mut corner_ids = Vec::new();
    for c in corners {
        let hit = boundary.iter().copied().find(|&v| g::dist(mesh.vertex(v), *c) <= tol);
        match hit {
            Some(v) => corner_ids.push(v),
            None => {
                return Err(Error::InvalidArgument(format!(
                    "corner {c:?} is not a boundary vertex of the mesh"
                )))
            }
        }
    }
    let mut vertices = mesh.vertices.clone();
    for arm in arms(mesh) {
        let first_corner = corner_ids.contains(&arm[0]);
        let last_corner = corner_ids.contains(arm.last().unwrap());
        if !first_corner && !last_corner {
            continue;
        }
        let n = arm.len() - 1;
        let mut arclen = vec![0.0; n + 1];
        for k in 1..=n {
            arclen[k] = arclen[k - 1] + g::dist(mesh.vertex(arm[k - 1]), mesh.vertex(arm[k]));
        }
        let total = arclen[n];
        let grade = |t: f64| -> f64 {
            match (first_corner, last_corner) {
                (true, true) => {
                    if t <= 0.5 {
                        0.5 * (2.0 * t).powf(exponent)
                    } else {
                        1.0 - 0.5 * (2.0 * (1.0 - t)).powf(exponent)
                    }
                }
                (true, false) => t.powf(exponent),
                _ => 1.0 - (1.0 - t).powf(exponent),
            }
        };
        for k in 1..n {
            let target = total * grade(k as f64 / n as f64);
            let seg = arclen.partition_point(|&s| s <= target).clamp(1, n);
            let (s0, s1) = (arclen[seg - 1], arclen[seg]);
            let t = (target - s0) / (s1 - s0);
            vertices[arm[k]] = g::lerp(mesh.vertex(arm[seg - 1]), mesh.vertex(arm[seg]), t);
        }
    }
    mesh.with_vertices(vertices)
}

/// Decomposes a 2D mesh into vertex chains between vertices of degree != 2.
fn arms(mesh: &SurfaceMesh) -> Vec<Vec<usize>> {
    let vf = mesh.vertex_facets();
    let mut used = vec![false; mesh.num_facets()];
    let mut out = Vec::new();
    let other = |f: usize, v: usize| {
        let ids = mesh.facet(f);
        if ids[0] == v {
            ids[1]
        } else {
            ids[0]
        }
    };
    for start in 0..mesh.num_vertices() {
        if vf[start].len() == 2 || vf[start].is_empty() {
            continue;
        }
        for &f0 in &vf[start] {
            if used[f0] {
                continue;
            }
            let mut chain = vec![start];
            let mut f = f0;
            loop {
                used[f] = true;
                let v = other(f, *chain.last().unwrap());
                chain.push(v);
                if vf[v].len() != 2 {
                    break;
                }
                let next = if vf[v][0] == f { vf[v][1] } else { vf[v][0] };
                if used[next] {
                    break;
                }
                f = next;
            }
            out.push(chain);
        }
    }
    out
}

/// Parses a mesh in the ASCII format: a header `dim n_vertices n_facets`,
/// then one coordinate line per vertex and one line of 0-based vertex ids
/// (optionally followed by an integer tag) per facet. Blank lines and
/// lines starting with `#` are ignored.
pub fn parse_mesh(text: &str) -> Result<SurfaceMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty file".into() })?;
    let head: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse { line: hl, msg: format!("bad header: {e}") })?;
    if head.len() != 3 {
        return Err(Error::Parse { line: hl, msg: "header must be `dim n_vertices n_facets`".into() });
    }
    let (dim, nv, nf) = (head[0], head[1], head[2]);
    if dim != 2 && dim != 3 {
        return Err(Error::Parse { line: hl, msg: format!("dimension {dim} not in {{2, 3}}") });
    }
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or(Error::Parse { line: hl, msg: "missing vertex lines".into() })?;
        let c: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;
        if c.len() != dim {
            return Err(Error::Parse { line: ln, msg: format!("expected {dim} coordinates") });
        }
        vertices.push([c[0], c[1], if dim == 3 { c[2] } else { 0.0 }]);
    }
    let mut facets = Vec::with_capacity(nf);
    let mut tags: Vec<Option<i64>> = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = lines.next().ok_or(Error::Parse { line: hl, msg: "missing facet lines".into() })?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != dim && toks.len() != dim + 1 {
            return Err(Error::Parse { line: ln, msg: format!("expected {dim} vertex ids") });
        }
        let ids: Vec<usize> = toks[..dim]
            .iter()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;
        let tag = match toks.get(dim) {
            Some(t) => Some(t.parse::<i64>().map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?),
            None => None,
        };
        facets.push(ids);
        tags.push(tag);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Parse { line: ln, msg: "trailing content".into() });
    }
    let tags = if tags.iter().any(Option::is_some) {
        Some(tags.into_iter().map(|t| t.unwrap_or(0)).collect())
    } else {
        None
    };
    SurfaceMesh::with_tags(dim, vertices, facets, tags)
}

/// Mesh sources accepted by [`load_mesh`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    /// The ASCII header-plus-lines format.
    Ascii,
    /// A builtin geometry spec string such as `plus` or `bowtie:side=2`.
    Builtin,
}

/// Loads a mesh from a file or a builtin spec.
pub fn load_mesh(source: &str, format: MeshFormat) -> Result<SurfaceMesh> {
    match format {
        MeshFormat::Ascii => parse_mesh(&std::fs::read_to_string(Path::new(source))?),
        MeshFormat::Builtin => builtin(source),
    }
}

/// Resolves a geometry argument: an existing file path, otherwise a builtin spec.
pub fn resolve_geometry(arg: &str) -> Result<SurfaceMesh> {
    if Path::new(arg).is_file() {
        load_mesh(arg, MeshFormat::Ascii)
    } else {
        load_mesh(arg, MeshFormat::Builtin)
    }
}

struct BuiltinSpec {
    name: String,
    params: HashMap<String, f64>,
}

impl BuiltinSpec {
    fn parse(spec: &str) -> Result<Self> {
        let (name, rest) = match spec.split_once(':') {
            Some((n, r)) => (n, r),
            None => (spec, ""),
        };
        let mut params = HashMap::new();
        for kv in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::UnknownGeometry(format!("{spec}: bad parameter `{kv}`")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| Error::UnknownGeometry(format!("{spec}: bad value `{v}`")))?;
            params.insert(k.trim().to_string(), v);
        }
        Ok(BuiltinSpec { name: name.trim().to_string(), params })
    }

    fn get(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn count(&self, key: &str) -> Result<usize> {
        let n = self.get(key, 1.0);
        if n < 1.0 || n.fract() != 0.0 {
            return Err(Error::InvalidArgument(format!("`{key}` must be a positive integer")));
        }
        Ok(n as usize)
    }
}

/// Star of straight arms from `center` to each tip, each arm split into `n`
/// equal segments. The center is vertex 0.
fn star_mesh(center: Vec3, tips: &[Vec3], n: usize) -> Result<SurfaceMesh> {
    let mut vertices = vec![center];
    let mut facets = Vec::new();
    for tip in tips {
        let mut prev = 0;
        for k in 1..=n {
            let p = if k == n { *tip } else { g::lerp(center, *tip, k as f64 / n as f64) };
            vertices.push(p);
            let id = vertices.len() - 1;
            facets.push(vec![prev, id]);
            prev = id;
        }
    }
    SurfaceMesh::new(2, vertices, facets)
}

/// Builtin geometries.
///
/// * `plus[:arm=a,n=k]`: `[-a,a]x{0} ∪ {0}x[-a,a]`, four arms of `k` segments
/// * `threefold[:radius=r,n=k]`: three arms from the centroid of an
///   equilateral triangle to its vertices
/// * `bowtie[:side=s]`: two perpendicular equilateral triangles sharing a
///   median, each split along the median
/// * `segment[:half=a,n=k]`: the slit `[-a,a]x{0}`
/// * `square[:half=a]`: flat screen `[-a,a]^2` in `z=0`, eight triangles
/// * `triangle`: the reference triangle
/// * `octahedron`: closed manifold surface
pub fn builtin(spec: &str) -> Result<SurfaceMesh> {
    let s = BuiltinSpec::parse(spec)?;
    match s.name.as_str() {
        "plus" => {
            let a = s.get("arm", 1.0);
            star_mesh(
                [0.0; 3],
                &[[a, 0.0, 0.0], [0.0, a, 0.0], [-a, 0.0, 0.0], [0.0, -a, 0.0]],
                s.count("n")?,
            )
        }
        "threefold" => {
            let r = s.get("radius", 1.0);
            let c = 0.5 * 3f64.sqrt() * r;
            star_mesh(
                [0.0; 3],
                &[[0.0, r, 0.0], [-c, -0.5 * r, 0.0], [c, -0.5 * r, 0.0]],
                s.count("n")?,
            )
        }
        "segment" => {
            let a = s.get("half", 1.0);
            let n = s.count("n")?;
            let vertices = (0..=n)
                .map(|k| [-a + 2.0 * a * k as f64 / n as f64, 0.0, 0.0])
                .collect();
            SurfaceMesh::new(2, vertices, (0..n).map(|k| vec![k, k + 1]).collect())
        }
        "bowtie" => {
            let side = s.get("side", 1.0);
            let half = 0.5 * side;
            let height = 0.5 * 3f64.sqrt() * side;
            let vertices = vec![
                [0.0, 0.0, 0.0],    // median foot
                [0.0, 0.0, height], // shared apex
                [half, 0.0, 0.0],
                [0.0, half, 0.0],
                [-half, 0.0, 0.0],
                [0.0, -half, 0.0],
            ];
            let facets = vec![vec![0, 2, 1], vec![0, 3, 1], vec![0, 4, 1], vec![0, 5, 1]];
            SurfaceMesh::new(3, vertices, facets)
        }
        "square" => {
            let a = s.get("half", 1.0);
            let mut vertices = vec![[0.0, 0.0, 0.0]];
            let ring = [
                [a, 0.0],
                [a, a],
                [0.0, a],
                [-a, a],
                [-a, 0.0],
                [-a, -a],
                [0.0, -a],
                [a, -a],
            ];
            for p in ring {
                vertices.push([p[0], p[1], 0.0]);
            }
            let facets = (0..8).map(|k| vec![0, 1 + k, 1 + (k + 1) % 8]).collect();
            SurfaceMesh::new(3, vertices, facets)
        }
        "triangle" => SurfaceMesh::new(
            3,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![vec![0, 1, 2]],
        ),
        "octahedron" => {
            let vertices = vec![
                [1.0, 0.0, 0.0],
                [-1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, -1.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.0, 0.0, -1.0],
            ];
            let facets = vec![
                vec![0, 2, 4],
                vec![2, 1, 4],
                vec![1, 3, 4],
                vec![3, 0, 4],
                vec![2, 0, 5],
                vec![1, 2, 5],
                vec![3, 1, 5],
                vec![0, 3, 5],
            ];
            SurfaceMesh::new(3, vertices, facets)
        }
        other => Err(Error::UnknownGeometry(other.to_string())),
    }
}

/// Tips of the builtin `plus` geometry (the four vertices of its boundary).
pub fn plus_tips(arm: f64) -> Vec<Vec3> {
    vec![[arm, 0.0, 0.0], [0.0, arm, 0.0], [-arm, 0.0, 0.0], [0.0, -arm, 0.0]]
}
