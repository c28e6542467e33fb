//! The inflated mesh: two oriented copies of every facet glued across
//! edges (vertices in 2D) by angular adjacency, and the generalized
//! vertices obtained as connected sectors of oriented facets around each
//! mesh vertex.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{self as g, Vec3};
use crate::mesh::SurfaceMesh;

/// Angular gap below which two facets around an edge are considered coincident.
const ANGLE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientedFacet {
    pub facet: usize,
    /// 0: normal from the vertex ordering; 1: the opposite normal.
    pub side: u8,
    pub normal: Vec3,
}

/// Oriented facet id of `(facet, side)`.
#[inline]
pub fn oriented_id(facet: usize, side: u8) -> usize {
    2 * facet + side as usize
}

/// The pairing of oriented facets around one codimension-one face.
#[derive(Clone, Debug)]
pub struct EdgeFan {
    /// Sorted vertex ids of the face (one id in 2D, two in 3D).
    pub face: Vec<usize>,
    /// Incident facets in angular order.
    pub facets: Vec<usize>,
    /// Matched oriented-facet pairs.
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralizedVertex {
    pub vertex: usize,
    /// 0-based branch index; the reference branch is `q_i - 1`.
    pub branch: usize,
    /// Sorted oriented-facet ids of the branch.
    pub alpha: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct InflatedMesh {
    base: SurfaceMesh,
    oriented: Vec<OrientedFacet>,
    fans: Vec<EdgeFan>,
    /// `partner[t][m]`: oriented facet glued to `t` across the face of
    /// `t`'s facet that does not contain local vertex `m`.
    partner: Vec<[usize; 3]>,
    gvertices: Vec<GeneralizedVertex>,
    gv_offset: Vec<usize>,
    q: Vec<usize>,
    /// `branch_of[t][k]`: branch of local vertex `k` that contains `t`.
    branch_of: Vec<[usize; 3]>,
    jump_dofs: Vec<(usize, usize)>,
    dof_of_gv: Vec<Option<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InflationSummary {
    pub vertices: usize,
    pub facets: usize,
    pub oriented_facets: usize,
    /// Number of vertices per branch count `q`.
    pub q_histogram: BTreeMap<usize, usize>,
    pub jump_dofs: usize,
}

/// Builds the inflated mesh and its generalized vertices.
pub fn inflate(mesh: &SurfaceMesh) -> Result<InflatedMesh> {
    let nf = mesh.num_facets();
    let dim = mesh.dim();
    let mut oriented = Vec::with_capacity(2 * nf);
    for f in 0..nf {
        let n = mesh.facet_normal(f);
        oriented.push(OrientedFacet { facet: f, side: 0, normal: n });
        oriented.push(OrientedFacet { facet: f, side: 1, normal: g::scale(n, -1.0) });
    }

    let mut partner = vec![[usize::MAX; 3]; 2 * nf];
    let mut fans = Vec::new();
    for (face, incident) in mesh.faces() {
        let fan = build_fan(mesh, &face, &incident)?;
        for &(s, t) in &fan.pairs {
            for (a, b) in [(s, t), (t, s)] {
                let m = opposite_local(mesh, a / 2, &face);
                partner[a][m] = b;
            }
        }
        fans.push(fan);
    }

    check_point_contacts(mesh)?;

    let vf = mesh.vertex_facets();
    let mut gvertices = Vec::new();
    let mut gv_offset = Vec::with_capacity(mesh.num_vertices() + 1);
    let mut q = Vec::with_capacity(mesh.num_vertices());
    let mut branch_of = vec![[usize::MAX; 3]; 2 * nf];
    for i in 0..mesh.num_vertices() {
        gv_offset.push(gvertices.len());
        let mut members: Vec<usize> = vf[i].iter().flat_map(|&f| [2 * f, 2 * f + 1]).collect();
        members.sort_unstable();
        let mut uf = UnionFind::new(members.len());
        let pos = |t: usize| members.binary_search(&t).unwrap();
        for &t in &members {
            let ids = mesh.facet(t / 2);
            for m in 0..dim {
                // Faces containing `i` are those opposite the other local vertices.
                if ids[m] == i {
                    continue;
                }
                let p = partner[t][m];
                uf.union(pos(t), pos(p));
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (k, &t) in members.iter().enumerate() {
            groups.entry(uf.find(k)).or_default().push(t);
        }
        let mut branches: Vec<Vec<usize>> = groups.into_values().collect();
        branches.sort_by_key(|b| b[0]);
        q.push(branches.len());
        for (j, alpha) in branches.into_iter().enumerate() {
            for &t in &alpha {
                let k = mesh.facet(t / 2).iter().position(|&v| v == i).unwrap();
                branch_of[t][k] = j;
            }
            gvertices.push(GeneralizedVertex { vertex: i, branch: j, alpha });
        }
    }
    gv_offset.push(gvertices.len());

    let mut jump_dofs = Vec::new();
    let mut dof_of_gv = vec![None; gvertices.len()];
    for i in 0..mesh.num_vertices() {
        for j in 0..q[i].saturating_sub(1) {
            dof_of_gv[gv_offset[i] + j] = Some(jump_dofs.len());
            jump_dofs.push((i, j));
        }
    }

    Ok(InflatedMesh {
        base: mesh.clone(),
        oriented,
        fans,
        partner,
        gvertices,
        gv_offset,
        q,
        branch_of,
        jump_dofs,
        dof_of_gv,
    })
}

/// Local index (within facet `f`) of the vertex not on `face`.
fn opposite_local(mesh: &SurfaceMesh, f: usize, face: &[usize]) -> usize {
    mesh.facet(f).iter().position(|v| !face.contains(v)).unwrap()
}

/// Sorts the facets around a face by angle and pairs adjacent sides.
fn build_fan(mesh: &SurfaceMesh, face: &[usize], incident: &[usize]) -> Result<EdgeFan> {
    let origin = mesh.vertex(face[0]);
    // Rotation axis (3D edge direction, or +z in 2D) and in-plane directions
    // pointing from the face into each facet.
    let (axis, dirs): (Vec3, Vec<Vec3>) = if mesh.dim() == 2 {
        let dirs = incident
            .iter()
            .map(|&f| {
                let other = mesh.facet(f).iter().copied().find(|&v| v != face[0]).unwrap();
                g::normalize(g::sub(mesh.vertex(other), origin))
            })
            .collect();
        ([0.0, 0.0, 1.0], dirs)
    } else {
        let e = g::normalize(g::sub(mesh.vertex(face[1]), origin));
        let dirs = incident
            .iter()
            .map(|&f| {
                let c = mesh.facet(f).iter().copied().find(|v| !face.contains(v)).unwrap();
                let w = g::sub(mesh.vertex(c), origin);
                g::normalize(g::sub(w, g::scale(e, g::dot(w, e))))
            })
            .collect();
        (e, dirs)
    };
    let u = dirs[0];
    let v = g::cross(axis, u);
    let mut order: Vec<(f64, usize)> = dirs
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let mut th = g::dot(*w, v).atan2(g::dot(*w, u));
            if th < 0.0 {
                th += 2.0 * std::f64::consts::PI;
            }
            (th, k)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    for k in 0..order.len() {
        let next = (k + 1) % order.len();
        if next == k {
            break;
        }
        let mut gap = order[next].0 - order[k].0;
        if next == 0 {
            gap += 2.0 * std::f64::consts::PI;
        }
        if gap < ANGLE_TOL {
            return Err(Error::AngularTie(incident[order[k].1], incident[order[next].1]));
        }
    }
    // Side of facet k facing the direction of increasing angle.
    let forward_side = |k: usize| -> u8 {
        let f = incident[k];
        let n = mesh.facet_normal(f);
        if g::dot(n, g::cross(axis, dirs[k])) > 0.0 {
            0
        } else {
            1
        }
    };
    let facets: Vec<usize> = order.iter().map(|&(_, k)| incident[k]).collect();
    let mut pairs = Vec::with_capacity(facets.len());
    for k in 0..order.len() {
        let a = order[k].1;
        let b = order[(k + 1) % order.len()].1;
        let sa = forward_side(a);
        let sb = 1 - forward_side(b);
        pairs.push((oriented_id(incident[a], sa), oriented_id(incident[b], sb)));
    }
    Ok(EdgeFan { face: face.to_vec(), facets, pairs })
}

/// Rejects 3D vertices whose incident facets are not connected through
/// edges containing the vertex.
fn check_point_contacts(mesh: &SurfaceMesh) -> Result<()> {
    if mesh.dim() != 3 {
        return Ok(());
    }
    let vf = mesh.vertex_facets();
    for (i, fs) in vf.iter().enumerate() {
        if fs.len() < 2 {
            continue;
        }
        let mut uf = UnionFind::new(fs.len());
        for a in 0..fs.len() {
            for b in a + 1..fs.len() {
                let shared = mesh.facet(fs[a]).iter().filter(|v| mesh.facet(fs[b]).contains(v)).count();
                if shared >= 2 {
                    uf.union(a, b);
                }
            }
        }
        let root = uf.find(0);
        if (1..fs.len()).any(|k| uf.find(k) != root) {
            return Err(Error::PointContact(i));
        }
    }
    Ok(())
}

impl InflatedMesh {
    pub fn base(&self) -> &SurfaceMesh {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn oriented_facets(&self) -> &[OrientedFacet] {
        &self.oriented
    }

    pub fn fans(&self) -> &[EdgeFan] {
        &self.fans
    }

    pub fn generalized_vertices(&self) -> &[GeneralizedVertex] {
        &self.gvertices
    }

    /// Index into [`Self::generalized_vertices`] of `(i, j)`.
    pub fn gv_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(j < self.q[i]);
        self.gv_offset[i] + j
    }

    pub fn num_gvertices(&self) -> usize {
        self.gvertices.len()
    }

    pub fn q(&self) -> &[usize] {
        &self.q
    }

    pub fn jump_dofs(&self) -> &[(usize, usize)] {
        &self.jump_dofs
    }

    pub fn num_dofs(&self) -> usize {
        self.jump_dofs.len()
    }

    /// Jump DOF index of the generalized vertex `gv`, if it is not a reference branch.
    pub fn dof_of_gv(&self, gv: usize) -> Option<usize> {
        self.dof_of_gv[gv]
    }

    pub fn dof_index(&self, i: usize, j: usize) -> Result<usize> {
        if i >= self.q.len() || j + 1 >= self.q[i] {
            return Err(Error::NotAJumpDof { vertex: i, branch: j });
        }
        Ok(self.dof_of_gv[self.gv_offset[i] + j].unwrap())
    }

    /// Branch at local vertex `k` of oriented facet `t`.
    pub fn branch_of(&self, t: usize, k: usize) -> usize {
        self.branch_of[t][k]
    }

    /// Generalized vertex index at local vertex `k` of oriented facet `t`.
    pub fn gv_at(&self, t: usize, k: usize) -> usize {
        let v = self.base.facet(t / 2)[k];
        self.gv_offset[v] + self.branch_of[t][k]
    }

    /// Oriented facet glued to `t` across the face not containing local vertex `m`.
    pub fn partner(&self, t: usize, m: usize) -> usize {
        self.partner[t][m]
    }

    /// Number of connected components of the inflated mesh under fan gluing.
    pub fn components(&self) -> usize {
        let n = self.oriented.len();
        let mut uf = UnionFind::new(n);
        for t in 0..n {
            for m in 0..self.dim() {
                uf.union(t, self.partner[t][m]);
            }
        }
        (0..n).filter(|&t| uf.find(t) == t).count()
    }

    pub fn summary(&self) -> InflationSummary {
        let mut hist = BTreeMap::new();
        for &qi in &self.q {
            *hist.entry(qi).or_insert(0) += 1;
        }
        InflationSummary {
            vertices: self.base.num_vertices(),
            facets: self.base.num_facets(),
            oriented_facets: self.oriented.len(),
            q_histogram: hist,
            jump_dofs: self.num_dofs(),
        }
    }
}

/// Σ_i (q_i − 1) over vertices with at least one branch.
pub fn jump_dof_count(inflated: &InflatedMesh) -> usize {
    inflated.q.iter().map(|&q| q.saturating_sub(1)).sum()
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins so that roots are deterministic.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
