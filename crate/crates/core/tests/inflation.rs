use proptest::prelude::*;
use screenbem_core::mesh::{builtin, refine_uniform_times, SurfaceMesh};
use screenbem_core::multiscreen::{inflate, jump_dof_count, InflatedMesh};
use screenbem_core::oracle_volume::{intrinsic_partition, BoxTetMesh};

fn level(name: &str, k: usize) -> SurfaceMesh {
    refine_uniform_times(&builtin(name).unwrap(), k).fine
}

/// Local index in `facet` of the vertex not on the shared face.
fn opposite(mesh: &SurfaceMesh, f: usize, face: &[usize]) -> usize {
    mesh.facet(f).iter().position(|v| !face.contains(v)).unwrap()
}

fn check_structure(inf: &InflatedMesh) {
    let mesh = inf.base();
    assert_eq!(inf.oriented_facets().len(), 2 * mesh.num_facets());
    assert_eq!(inf.num_dofs(), jump_dof_count(inf));
    let expect: usize = inf.q().iter().map(|q| q - 1).sum();
    assert_eq!(inf.num_dofs(), expect);
    for fan in inf.fans() {
        // Every oriented copy of an incident facet is matched exactly once.
        let mut seen: Vec<usize> = fan.pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        seen.sort_unstable();
        let mut want: Vec<usize> = fan.facets.iter().flat_map(|&f| [2 * f, 2 * f + 1]).collect();
        want.sort_unstable();
        assert_eq!(seen, want, "fan {:?}", fan.face);
        for &(a, b) in &fan.pairs {
            let ma = opposite(mesh, a / 2, &fan.face);
            let mb = opposite(mesh, b / 2, &fan.face);
            assert_eq!(inf.partner(a, ma), b);
            assert_eq!(inf.partner(b, mb), a);
        }
    }
}

#[test]
fn counts_and_involution_on_builtins() {
    for name in ["plus", "threefold", "segment", "bowtie", "square", "triangle", "octahedron"] {
        for k in 0..3 {
            check_structure(&inflate(&level(name, k)).unwrap());
        }
    }
}

#[test]
fn characteristic_branch_counts() {
    let plus = inflate(&level("plus", 1)).unwrap();
    assert_eq!(plus.q()[0], 4);
    for i in 1..plus.base().num_vertices() {
        let tip = plus.base().vertex_facets()[i].len() == 1;
        assert_eq!(plus.q()[i], if tip { 1 } else { 2 }, "vertex {i}");
    }
    let three = inflate(&level("threefold", 1)).unwrap();
    assert_eq!(three.q()[0], 3);
    let square = inflate(&level("square", 1)).unwrap();
    let boundary = square.base().boundary_vertices();
    for i in 0..square.base().num_vertices() {
        assert_eq!(square.q()[i], if boundary.contains(&i) { 1 } else { 2 });
    }
    // Foot and apex of the shared median are screen boundary points; its
    // midpoint sits inside all four fins.
    let bow = inflate(&level("bowtie", 1)).unwrap();
    assert_eq!(bow.q()[0], 1);
    assert_eq!(bow.q()[1], 1);
    let mid = (0..bow.base().num_vertices())
        .find(|&i| {
            let p = bow.base().vertex(i);
            p[0] == 0.0 && p[1] == 0.0 && p[2] > 0.1 && p[2] < 0.8
        })
        .unwrap();
    assert_eq!(bow.q()[mid], 4);
}

#[test]
fn volume_oracle_agrees_on_coarse_builtins() {
    for name in ["plus", "threefold", "segment", "bowtie", "square"] {
        for k in 0..2 {
            let mesh = level(name, k);
            let inf = inflate(&mesh).unwrap();
            let vol = BoxTetMesh::for_builtin(name, &mesh).unwrap();
            assert_eq!(vol.mismatches(&inf).unwrap(), Vec::<usize>::new(), "{name} level {k}");
            for i in 0..mesh.num_vertices() {
                assert_eq!(vol.volume_branches(i).unwrap().count, inf.q()[i], "{name} level {k} vertex {i}");
            }
        }
    }
}

#[test]
fn volume_oracle_examples() {
    let square = level("square", 1);
    let vol = BoxTetMesh::for_builtin("square", &square).unwrap();
    let center = vol.volume_branches(0).unwrap();
    assert_eq!(center.count, 2);
    let plus = builtin("plus").unwrap();
    let vol = BoxTetMesh::for_builtin("plus", &plus).unwrap();
    assert_eq!(vol.volume_branches(0).unwrap().count, 4);
    assert!(vol.volume_branches(99).is_err());
    let inf = inflate(&plus).unwrap();
    assert_eq!(vol.volume_branches(0).unwrap().partition(), intrinsic_partition(&inf, 0));
}

#[test]
fn point_contact_is_rejected() {
    // Two triangles touching at a single vertex.
    let mesh = SurfaceMesh::new(
        3,
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.5], [0.0, -1.0, 0.5]],
        vec![vec![0, 1, 2], vec![0, 3, 4]],
    )
    .unwrap();
    assert!(inflate(&mesh).is_err());
}

/// A 2D star with arms at the given angles, each split into `n` segments.
fn star(angles: &[f64], n: &[usize]) -> SurfaceMesh {
    let mut vertices = vec![[0.0, 0.0, 0.0]];
    let mut facets = Vec::new();
    for (a, &k) in angles.iter().zip(n) {
        let mut prev = 0;
        for s in 1..=k {
            let r = s as f64 / k as f64;
            vertices.push([r * a.cos(), r * a.sin(), 0.0]);
            facets.push(vec![prev, vertices.len() - 1]);
            prev = vertices.len() - 1;
        }
    }
    SurfaceMesh::new(2, vertices, facets).unwrap()
}

proptest! {
    #[test]
    fn star_junction_has_one_branch_per_sector(
        gaps in prop::collection::vec(0.3f64..1.0, 2..7),
        n in prop::collection::vec(1usize..4, 7),
    ) {
        let total: f64 = gaps.iter().sum();
        let mut angles = Vec::new();
        let mut acc = 0.0;
        for gap in &gaps {
            angles.push(acc / total * std::f64::consts::TAU);
            acc += gap;
        }
        let mesh = star(&angles, &n[..angles.len()]);
        let inf = inflate(&mesh).unwrap();
        check_structure(&inf);
        let arms = angles.len();
        prop_assert_eq!(inf.q()[0], arms);
        prop_assert_eq!(inf.components(), 1);
        for i in 1..mesh.num_vertices() {
            let tip = mesh.vertex_facets()[i].len() == 1;
            prop_assert_eq!(inf.q()[i], if tip { 1 } else { 2 });
        }
    }

    #[test]
    fn refinement_preserves_structure(k in 0usize..3, which in 0usize..5) {
        let name = ["plus", "threefold", "bowtie", "square", "segment"][which];
        let inf = inflate(&level(name, k)).unwrap();
        check_structure(&inf);
        let coarse = inflate(&builtin(name).unwrap()).unwrap();
        prop_assert_eq!(inf.components(), coarse.components());
    }
}
