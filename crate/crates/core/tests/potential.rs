use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use screenbem_core::jump::{expand, TraceField};
use screenbem_core::mesh::{builtin, refine_uniform_times};
use screenbem_core::multiscreen::{inflate, InflatedMesh};
use screenbem_core::potential::{eval_dl, eval_dl_field, jump_across, EvaluationGrid};

fn level(name: &str, k: usize) -> InflatedMesh {
    inflate(&refine_uniform_times(&builtin(name).unwrap(), k).fine).unwrap()
}

fn random_jump(inf: &InflatedMesh, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..inf.num_dofs()).map(|_| rng.random_range(-1.0..1.0)).collect()
}

const PROBES: [[f64; 3]; 4] = [[0.31, 0.47, 0.23], [-1.3, 0.8, -0.6], [2.5, -1.7, 0.9], [0.05, -0.62, 1.4]];

fn probes(dim: usize) -> Vec<[f64; 3]> {
    PROBES.iter().map(|p| if dim == 2 { [p[0], p[1], 0.0] } else { *p }).collect()
}

#[test]
fn single_trace_fields_have_no_potential() {
    for name in ["plus", "threefold", "bowtie", "square"] {
        let inf = level(name, 1);
        let f = TraceField::single_trace(&inf, |i| {
            let p = inf.base().vertex(i);
            2.0 - p[0] + 3.0 * p[1] * p[1] + p[2]
        });
        for u in eval_dl_field(&f, &inf, &probes(inf.dim())).unwrap() {
            assert!(u.abs() <= 1e-8, "{name}: {u:e}");
        }
    }
}

#[test]
fn jump_relation_at_barycenters() {
    for name in ["plus", "threefold", "bowtie", "square"] {
        let inf = level(name, 2);
        let field = expand(&random_jump(&inf, 7), &inf).unwrap();
        let h = inf.base().mesh_size();
        let bary: Vec<f64> = if inf.dim() == 2 { vec![0.37, 0.63] } else { vec![0.29, 0.33, 0.38] };
        let mut checked = 0;
        for t in (0..inf.oriented_facets().len()).step_by(2) {
            // The side n_t points into carries the trace of the opposite sheet.
            let expect = field.eval(&inf, t + 1, &bary) - field.eval(&inf, t, &bary);
            if expect.abs() < 0.1 {
                continue;
            }
            let got = jump_across(&field, &inf, t, &bary, 1e-3 * h).unwrap();
            assert!((got - expect).abs() <= 0.01 * expect.abs(), "{name} facet {}: {got} vs {expect}", t / 2);
            checked += 1;
            if checked == 10 {
                break;
            }
        }
        assert_eq!(checked, 10, "{name}: too few facets with a visible jump");
    }
}

#[test]
fn far_field_decays_along_a_ray() {
    for name in ["plus", "threefold", "bowtie"] {
        let inf = level(name, 1);
        let field = expand(&random_jump(&inf, 3), &inf).unwrap();
        let dir = if inf.dim() == 2 { [0.6, 0.8, 0.0] } else { [0.48, 0.6, 0.64] };
        let rs = [10.0, 20.0, 40.0];
        let pts: Vec<[f64; 3]> = rs.iter().map(|r| [r * dir[0], r * dir[1], r * dir[2]]).collect();
        let u = eval_dl_field(&field, &inf, &pts).unwrap();
        let scaled: Vec<f64> = u.iter().zip(rs).map(|(u, r)| u.abs() * r).collect();
        // |U| r tends to the dipole limit (2D) or to zero (3D).
        assert!((scaled[2] - scaled[1]).abs() < (scaled[1] - scaled[0]).abs(), "{name}: {scaled:?}");
        if inf.dim() == 2 {
            let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(a, b), s| (a.min(*s), b.max(*s)));
            assert!(lo > 0.0 && hi <= 1.5 * lo, "{name}: {scaled:?}");
        } else {
            assert!(scaled[1] < scaled[0] && scaled[2] < scaled[1], "{name}: {scaled:?}");
        }
    }
}

#[test]
fn grid_evaluation_masks_the_screen() {
    let inf = level("plus", 2);
    let v = random_jump(&inf, 1);
    let grid = EvaluationGrid::square(inf.base(), 2.0, 20, 0.05);
    let u = eval_dl(&v, &inf, &grid).unwrap();
    assert_eq!(u.len(), grid.points.len());
    assert!(u.iter().all(|x| x.is_finite()));
    let bad = EvaluationGrid { points: vec![[0.5, 0.0, 0.0]], ..grid };
    assert!(eval_dl(&v, &inf, &bad).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn potential_is_linear_in_the_jump(a in -3.0f64..3.0, b in -3.0f64..3.0, s1 in 0u64..1000, s2 in 0u64..1000, which in 0usize..3) {
        let inf = level(["plus", "threefold", "bowtie"][which], 1);
        let x = random_jump(&inf, s1);
        let y = random_jump(&inf, s2);
        let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let pts = probes(inf.dim());
        let eval = |v: &[f64]| eval_dl_field(&expand(v, &inf).unwrap(), &inf, &pts).unwrap();
        let (ux, uy, uz) = (eval(&x), eval(&y), eval(&z));
        for k in 0..pts.len() {
            let lin = a * ux[k] + b * uy[k];
            prop_assert!((uz[k] - lin).abs() <= 1e-12 * (1.0 + lin.abs()));
        }
    }
}
