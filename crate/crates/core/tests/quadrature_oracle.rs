//! Galerkin entries against the independent reference in `common`.

mod common;

use common::*;
use screenbem_core::assembly::{assemble_v, QuadratureConfig};
use screenbem_core::mesh::{builtin, refine_uniform_times, SurfaceMesh};

fn check_v_entries(mesh: &SurfaceMesh, tol: f64) -> faer::Mat<f64> {
    let (rel, o) = v_entry_error(mesh);
    assert!(rel <= tol, "V relative error {rel:e}");
    o
}

#[test]
fn oracle_potential_matches_far_field() {
    let t = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.2, 0.9, 0.0]];
    let x = [3.0, -2.0, 1.5];
    let f = |y: P| 1.0 / norm(sub(x, y));
    let c = tri_rule(&t, &f);
    let brute = adaptive_tri(&t, &f, c, 1e-13, 0);
    assert!((triangle_potential(x, &t) - brute).abs() < 1e-11);
    let x2 = [0.4, 0.3, -0.05];
    let f2 = |y: P| 1.0 / norm(sub(x2, y));
    let c2 = tri_rule(&t, &f2);
    let brute2 = adaptive_tri(&t, &f2, c2, 1e-12, 0);
    assert!((triangle_potential(x2, &t) - brute2).abs() < 1e-7 * brute2);
}

#[test]
fn two_triangle_screen_entries() {
    let mesh = SurfaceMesh::new(
        3,
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
        vec![vec![0, 1, 2], vec![1, 3, 2]],
    )
    .unwrap();
    check_v_entries(&mesh, 1e-6);
}

#[test]
fn vertex_and_near_pairs() {
    // Shared vertex only, and a nearly touching disjoint pair.
    let mesh = SurfaceMesh::new(
        3,
        vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [-1.0, 0.0, 0.3],
            [0.0, -1.0, 0.2],
            [1.1, 0.1, 0.05],
            [1.1, 1.0, 0.3],
            [2.0, 0.2, 0.0],
        ],
        vec![vec![0, 1, 2], vec![0, 3, 4], vec![5, 7, 6]],
    )
    .unwrap();
    check_v_entries(&mesh, 1e-6);
}

#[test]
fn bowtie_patch_entries() {
    let mesh = bowtie_patch();
    let o = check_v_entries(&mesh, 1e-6);
    let rel = w_error(&mesh, &o);
    assert!(rel <= 1e-6, "W relative error {rel:e}");
}

#[test]
fn segment_pairs_2d() {
    let plus = refine_uniform_times(&builtin("plus").unwrap(), 2).fine;
    check_v_entries(&plus, 1e-6);
    let three = refine_uniform_times(&builtin("threefold").unwrap(), 1).fine;
    let o = check_v_entries(&three, 1e-6);
    let rel = w_error(&three, &o);
    assert!(rel <= 1e-6, "W relative error {rel:e}");
}

#[test]
fn raising_singular_order_changes_little() {
    let mesh = refine_uniform_times(&builtin("bowtie").unwrap(), 1).fine;
    let base = QuadratureConfig::default();
    let more = QuadratureConfig { singular_order: base.singular_order + 2, ..base };
    let a = assemble_v(&mesh, &base).unwrap();
    let b = assemble_v(&mesh, &more).unwrap();
    for i in 0..mesh.num_facets() {
        for j in 0..mesh.num_facets() {
            let rel = (a[(i, j)] - b[(i, j)]).abs() / b[(i, j)].abs();
            assert!(rel < 1e-8, "({i},{j}) {rel:e}");
        }
    }
}
