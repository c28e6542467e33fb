//! Volume-based reference for generalized vertices.
//!
//! The screen is embedded in a structured simplicial mesh of a box (a
//! square split along the `(1, 1)` diagonals in 2D, Kuhn cubes mirrored per
//! octant in 3D) whose faces contain the screen facets. The branches at a
//! screen vertex are the connected components of its star, where two cells
//! are adjacent when they share a face that is not a screen facet. Screens
//! that are not grid-aligned are first moved onto the grid by an
//! orientation-preserving linear map, which leaves the branch structure
//! unchanged.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::geometry::{self as g, Vec3};
use crate::mesh::SurfaceMesh;
use crate::multiscreen::{oriented_id, InflatedMesh, UnionFind};

/// Oriented facets grouped by branch, as a set of sets.
pub type BranchPartition = BTreeSet<BTreeSet<usize>>;

/// Row-major linear map.
pub type LinearMap = [[f64; 3]; 3];

pub const IDENTITY: LinearMap = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub struct BoxTetMesh {
    dim: usize,
    /// Screen with mapped vertex coordinates.
    screen: SurfaceMesh,
    points: Vec<Vec3>,
    cells: Vec<Vec<usize>>,
    /// Box point of every screen vertex.
    screen_point: Vec<usize>,
    /// Sorted box point ids of each screen facet → facet id.
    screen_faces: BTreeMap<Vec<usize>, usize>,
    /// Cells containing each box point.
    star: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct VolumeBranches {
    pub count: usize,
    /// Oriented screen facets touched by each component.
    pub members: Vec<BTreeSet<usize>>,
}

impl VolumeBranches {
    pub fn partition(&self) -> BranchPartition {
        self.members.iter().cloned().collect()
    }
}

fn apply(map: &LinearMap, p: Vec3) -> Vec3 {
    [g::dot(map[0], p), g::dot(map[1], p), g::dot(map[2], p)]
}

fn det(m: &LinearMap) -> f64 {
    g::dot(m[0], g::cross(m[1], m[2]))
}

fn max_norm(mesh: &SurfaceMesh) -> f64 {
    mesh.vertices().iter().map(|p| g::norm(*p)).fold(0.0, f64::max)
}

/// Linear map taking a builtin screen onto grid-aligned coordinates.
pub fn builtin_map(name: &str, mesh: &SurfaceMesh) -> Result<LinearMap> {
    let s = |k: f64| [[k, 0.0, 0.0], [0.0, k, 0.0], [0.0, 0.0, k]];
    match name {
        "plus" | "segment" => Ok(s(1.0 / max_norm(mesh))),
        "square" => Ok(s(std::f64::consts::SQRT_2 / max_norm(mesh))),
        "threefold" => {
            // Tips (0, r), (−c, −r/2), (c, −r/2) ↦ (0, 1), (−1, −1), (1, 0).
            let r = max_norm(mesh);
            let c = 0.5 * 3f64.sqrt() * r;
            Ok([[1.0 / c, 0.0, 0.0], [0.5 / c, 1.0 / r, 0.0], [0.0, 0.0, 1.0]])
        }
        "bowtie" => {
            // Apex at height √3/2·side, feet at distance side/2.
            let half = mesh.vertices().iter().map(|p| p[0].abs()).fold(0.0, f64::max);
            let height = mesh.vertices().iter().map(|p| p[2]).fold(0.0, f64::max);
            Ok([[1.0 / half, 0.0, 0.0], [0.0, 1.0 / half, 0.0], [0.0, 0.0, 1.0 / height]])
        }
        other => Err(Error::InvalidArgument(format!("no structured box for geometry `{other}`"))),
    }
}

impl BoxTetMesh {
    /// Box mesh for a builtin geometry at any uniform refinement level.
    pub fn for_builtin(name: &str, mesh: &SurfaceMesh) -> Result<Self> {
        let map = builtin_map(name, mesh)?;
        BoxTetMesh::build(mesh, &map)
    }

    /// Box mesh around a screen that becomes grid-aligned under `map`. The
    /// grid spacing is the smallest max-norm edge length of the mapped screen.
    pub fn build(mesh: &SurfaceMesh, map: &LinearMap) -> Result<Self> {
        let dim = mesh.dim();
        if !(det(map) > 0.0) {
            return Err(Error::InvalidArgument("map must preserve orientation".into()));
        }
        let mapped: Vec<Vec3> = mesh.vertices().iter().map(|p| apply(map, *p)).collect();
        let screen = mesh.with_vertices(mapped)?;
        let mut spacing = f64::INFINITY;
        for f in screen.facets() {
            for a in 0..f.len() {
                for b in a + 1..f.len() {
                    let d = g::sub(screen.vertex(f[a]), screen.vertex(f[b]));
                    let m = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                    spacing = spacing.min(m);
                }
            }
        }
        // Grid nodes are `origin + spacing · (i, j, k)` with the first
        // screen vertex as origin.
        let origin = screen.vertex(0);
        let extent = screen
            .vertices()
            .iter()
            .flat_map(|p| (0..3).map(move |a| (p[a] - origin[a]).abs()))
            .fold(0.0f64, f64::max);
        let n = (extent / spacing).round() as i64 + 1;

        let side = (2 * n + 1) as usize;
        let index = |c: [i64; 3]| -> usize {
            let (i, j, k) = ((c[0] + n) as usize, (c[1] + n) as usize, (c[2] + n) as usize);
            if dim == 2 {
                i + side * j
            } else {
                i + side * (j + side * k)
            }
        };
        let zr: std::ops::RangeInclusive<i64> = if dim == 2 { 0..=0 } else { -n..=n };
        let mut points = Vec::new();
        for k in zr {
            for j in -n..=n {
                for i in -n..=n {
                    points.push(g::add(origin, [i as f64 * spacing, j as f64 * spacing, k as f64 * spacing]));
                }
            }
        }

        let mut cells = Vec::new();
        if dim == 2 {
            for j in -n..n {
                for i in -n..n {
                    let p = |a: i64, b: i64| index([i + a, j + b, 0]);
                    cells.push(vec![p(0, 0), p(1, 0), p(1, 1)]);
                    cells.push(vec![p(0, 0), p(1, 1), p(0, 1)]);
                }
            }
        } else {
            const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            for k in -n..n {
                for j in -n..n {
                    for i in -n..n {
                        let lower = [i, j, k];
                        // Local coordinates are mirrored so that face
                        // diagonals run from the z axis outwards.
                        let flip = [i < 0, j < 0, k >= 0];
                        let corner = |t: [i64; 3]| {
                            let mut c = [0i64; 3];
                            for a in 0..3 {
                                c[a] = lower[a] + if flip[a] { 1 - t[a] } else { t[a] };
                            }
                            index(c)
                        };
                        for perm in PERMS {
                            let mut t = [0i64; 3];
                            let mut tet = vec![corner(t)];
                            for &a in &perm {
                                t[a] = 1;
                                tet.push(corner(t));
                            }
                            cells.push(tet);
                        }
                    }
                }
            }
        }

        let mut screen_point = Vec::with_capacity(screen.num_vertices());
        for (v, p) in screen.vertices().iter().enumerate() {
            let mut c = [0i64; 3];
            for a in 0..3 {
                let x = (p[a] - origin[a]) / spacing;
                if (x - x.round()).abs() > 1e-9 {
                    return Err(Error::InvalidMesh(format!("screen vertex {v} is not on the box grid")));
                }
                c[a] = x.round() as i64;
            }
            screen_point.push(index(c));
        }

        let mut star = vec![Vec::new(); points.len()];
        for (c, cell) in cells.iter().enumerate() {
            for &p in cell {
                star[p].push(c);
            }
        }
        let mut box_faces = BTreeSet::new();
        for cell in &cells {
            for skip in 0..cell.len() {
                box_faces.insert(face_key(cell, skip));
            }
        }
        let mut screen_faces = BTreeMap::new();
        for (f, facet) in screen.facets().enumerate() {
            let mut key: Vec<usize> = facet.iter().map(|&v| screen_point[v]).collect();
            key.sort_unstable();
            if !box_faces.contains(&key) {
                return Err(Error::InvalidMesh(format!("screen facet {f} is not a face of the box mesh")));
            }
            screen_faces.insert(key, f);
        }
        Ok(BoxTetMesh { dim, screen, points, cells, screen_point, screen_faces, star })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    /// Components of the star of screen vertex `i` under face adjacency
    /// that avoids screen facets.
    pub fn volume_branches(&self, i: usize) -> Result<VolumeBranches> {
        let b = *self
            .screen_point
            .get(i)
            .ok_or_else(|| Error::InvalidArgument(format!("vertex {i} is not in the box mesh")))?;
        let star = &self.star[b];
        let mut uf = UnionFind::new(star.len());
        let mut by_face: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (local, &c) in star.iter().enumerate() {
            let cell = &self.cells[c];
            for skip in 0..cell.len() {
                if cell[skip] != b {
                    by_face.entry(face_key(cell, skip)).or_default().push(local);
                }
            }
        }
        for (key, cs) in &by_face {
            if cs.len() == 2 && !self.screen_faces.contains_key(key) {
                uf.union(cs[0], cs[1]);
            }
        }
        let mut comps: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for local in 0..star.len() {
            comps.entry(uf.find(local)).or_default();
        }
        for (key, cs) in &by_face {
            let Some(&f) = self.screen_faces.get(key) else { continue };
            let n = self.screen.facet_normal(f);
            let ct = self.screen.facet_centroid(f);
            for &local in cs {
                let ck = g::centroid(&self.cells[star[local]].iter().map(|&p| self.points[p]).collect::<Vec<_>>());
                let side = if g::dot(n, g::sub(ck, ct)) > 0.0 { 0 } else { 1 };
                comps.get_mut(&uf.find(local)).unwrap().insert(oriented_id(f, side));
            }
        }
        let members: Vec<BTreeSet<usize>> = comps.into_values().collect();
        Ok(VolumeBranches { count: members.len(), members })
    }

    /// Screen vertices whose volume and intrinsic branch partitions differ.
    pub fn mismatches(&self, inflated: &InflatedMesh) -> Result<Vec<usize>> {
        let mut bad = Vec::new();
        for i in 0..self.screen.num_vertices() {
            if self.volume_branches(i)?.partition() != intrinsic_partition(inflated, i) {
                bad.push(i);
            }
        }
        Ok(bad)
    }
}

fn face_key(cell: &[usize], skip: usize) -> Vec<usize> {
    let mut key: Vec<usize> = cell.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &p)| p).collect();
    key.sort_unstable();
    key
}

/// Branches of vertex `i` from the inflated mesh, as sets of oriented facets.
pub fn intrinsic_partition(inflated: &InflatedMesh, i: usize) -> BranchPartition {
    let mesh = inflated.base();
    let mut groups: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (f, facet) in mesh.facets().enumerate() {
        if let Some(k) = facet.iter().position(|&v| v == i) {
            for side in 0..2 {
                let t = oriented_id(f, side);
                groups.entry(inflated.branch_of(t, k)).or_default().insert(t);
            }
        }
    }
    groups.into_values().collect()
}
