//! Acceptance report: one PASS/FAIL line per criterion with its measured
//! value. Failures are reported, not hidden; set `ACCEPTANCE_STRICT=1` to
//! turn any failure into a nonzero exit status.

mod common;

use std::time::Instant;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use screenbem_core::assembly::{assemble_rhs, assemble_v, assemble_w, assemble_w_from_v, form_row, QuadratureConfig};
use screenbem_core::experiments::{self, CondResult, ExperimentConfig};
use screenbem_core::jump::{build_prolongation, expand, TraceField};
use screenbem_core::linalg::{dot, matvec, max_abs, sym_eigenvalues};
use screenbem_core::mesh::{builtin, refine_uniform_times, SurfaceMesh};
use screenbem_core::multiscreen::{inflate, InflatedMesh};
use screenbem_core::oracle_volume::BoxTetMesh;
use screenbem_core::potential::{eval_dl_field, jump_across};
use screenbem_core::precond::{
    condition_number, materialize, partition_dofs, ExactInverse, Preconditioner, SchwarzPreconditioner,
};
use screenbem_core::solver::{direct_solve, pcg};

type Check = (bool, String);

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: &str, label: &str, (ok, detail): Check, secs: f64) {
        if !ok {
            self.failures += 1;
        }
        println!("{} [{id}] {label}: {detail} ({secs:.1} s)", if ok { "PASS" } else { "FAIL" });
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

fn level(name: &str, k: usize) -> SurfaceMesh {
    refine_uniform_times(&builtin(name).unwrap(), k).fine
}

fn all(checks: &[Check]) -> Check {
    let ok = checks.iter().all(|c| c.0);
    let detail = checks.iter().map(|c| c.1.as_str()).collect::<Vec<_>>().join("; ");
    (ok, detail)
}

fn out_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("screenbem-acceptance-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn experiment1() -> Check {
    let config = ExperimentConfig { out: out_dir("exp1"), ..ExperimentConfig::experiment1() };
    let r = experiments::cmd_experiment1(&config).unwrap();
    let h0 = r.h[0];
    let halvings = r.h.len() - 1;
    let ok = (0.8..=1.2).contains(&r.eoc_uniform)
        && (1.6..=2.3).contains(&r.eoc_graded)
        && halvings >= 4
        && (h0 - 0.2).abs() < 0.05;
    (ok, format!("h0 = {h0:.3}, {halvings} halvings, EOC uniform {:.3} (need [0.8, 1.2]), graded {:.3} (need [1.6, 2.3])", r.eoc_uniform, r.eoc_graded))
}

fn cond_checks(res: &CondResult) -> (Check, Check) {
    let fine = res.rows.last().unwrap();
    let a = (
        fine.kappa_prec <= fine.kappa_unprec,
        format!("finest kappa_prec {:.3} <= kappa_unprec {:.3}", fine.kappa_prec, fine.kappa_unprec),
    );
    let ratios: Vec<f64> = res.rows.iter().map(|r| (r.coarse_h / r.h).round()).filter(|q| *q > 1.5).collect();
    let covered = [2.0, 4.0, 8.0, 16.0].iter().all(|q| ratios.contains(q));
    let fit = &res.fits[0];
    let b = (
        covered && fit.polylog_ratio < 3.0,
        format!(
            "H/h = {ratios:?}, max/min kappa_prec/(1+ln(H/h))^2 = {:.3} (need < 3), kappa_prec = {:?}",
            fit.polylog_ratio,
            res.rows.iter().map(|r| (r.kappa_prec * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        ),
    );
    (a, b)
}

/// Open screens; the closed octahedron carries constant jumps in the kernel.
const SCREENS: [&str; 6] = ["plus", "threefold", "bowtie", "segment", "square", "triangle"];

fn two_levels(name: &str) -> Vec<InflatedMesh> {
    (0..4).map(|k| inflate(&level(name, k)).unwrap()).filter(|i| i.num_dofs() > 0).take(2).collect()
}

fn galerkin_suite() -> Check {
    let cfg = QuadratureConfig::default();
    let mut worst_single: f64 = 0.0;
    let mut min_lambda = f64::INFINITY;
    let mut symmetric = true;
    for name in SCREENS {
        for inf in two_levels(name) {
            let v = assemble_v(inf.base(), &cfg).unwrap();
            let w = assemble_w_from_v(&inf, &v).unwrap();
            let n = w.nrows();
            symmetric &= (0..n).all(|i| (0..n).all(|j| w[(i, j)].to_bits() == w[(j, i)].to_bits()));
            min_lambda = min_lambda.min(sym_eigenvalues(&w).unwrap()[0]);
            let single = TraceField::single_trace(&inf, |i| {
                let p = inf.base().vertex(i);
                1.0 + p[0] - 2.0 * p[1] + 0.5 * p[2]
            });
            let row = form_row(&inf, &v, &single);
            let scale = max_abs(&w);
            worst_single = worst_single.max(row.iter().fold(0.0f64, |m, x| m.max(x.abs())) / scale);
        }
    }
    let mut oracle: f64 = 0.0;
    let plus = level("plus", 2);
    oracle = oracle.max(common::v_entry_error(&plus).0);
    for mesh in [common::bowtie_patch(), level("threefold", 1)] {
        let (rel, o) = common::v_entry_error(&mesh);
        oracle = oracle.max(rel).max(common::w_error(&mesh, &o));
    }
    all(&[
        (symmetric, format!("bitwise symmetric: {symmetric}")),
        (min_lambda > 0.0, format!("min lambda_min {min_lambda:.3e} (need > 0)")),
        (worst_single <= 1e-6, format!("single-trace rows {worst_single:.1e} (need <= 1e-6)")),
        (oracle <= 1e-6, format!("oracle patches {oracle:.1e} (need <= 1e-6)")),
    ])
}

fn opposite(mesh: &SurfaceMesh, f: usize, face: &[usize]) -> usize {
    mesh.facet(f).iter().position(|v| !face.contains(v)).unwrap()
}

fn inflation_suite() -> Check {
    let mut structure = true;
    for name in ["plus", "threefold", "bowtie", "segment", "square", "triangle", "octahedron"] {
        for k in 0..3 {
            let inf = inflate(&level(name, k)).unwrap();
            let mesh = inf.base();
            structure &= inf.oriented_facets().len() == 2 * mesh.num_facets();
            structure &= inf.num_dofs() == inf.q().iter().map(|q| q - 1).sum::<usize>();
            for fan in inf.fans() {
                for &(a, b) in &fan.pairs {
                    let ma = opposite(mesh, a / 2, &fan.face);
                    let mb = opposite(mesh, b / 2, &fan.face);
                    structure &= inf.partner(a, ma) == b && inf.partner(b, mb) == a;
                }
            }
        }
    }
    let plus = inflate(&level("plus", 1)).unwrap();
    let three = inflate(&level("threefold", 1)).unwrap();
    let square = inflate(&level("square", 1)).unwrap();
    let boundary = square.base().boundary_vertices();
    let q_ok = plus.q()[0] == 4
        && three.q()[0] == 3
        && (0..square.base().num_vertices())
            .all(|i| square.q()[i] == if boundary.contains(&i) { 1 } else { 2 });
    let mut oracle = true;
    for name in ["plus", "threefold", "bowtie", "segment", "square"] {
        for k in 0..2 {
            let mesh = level(name, k);
            let inf = inflate(&mesh).unwrap();
            let vol = BoxTetMesh::for_builtin(name, &mesh).unwrap();
            oracle &= vol.mismatches(&inf).unwrap().is_empty();
        }
    }
    all(&[
        (structure, format!("counts and fan involution: {structure}")),
        (q_ok, format!("q plus/threefold/interior/boundary = 4/3/2/1: {q_ok}")),
        (oracle, format!("volume oracle agreement: {oracle}")),
    ])
}

fn potential_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut lin: f64 = 0.0;
    let mut single: f64 = 0.0;
    let mut jump: f64 = 0.0;
    let mut jumps_checked = true;
    let mut far = true;
    for name in ["plus", "threefold", "bowtie", "square"] {
        let inf = inflate(&level(name, 2)).unwrap();
        let n = inf.num_dofs();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
        let pts: Vec<[f64; 3]> = if inf.dim() == 2 {
            vec![[0.31, 0.47, 0.0], [-1.3, 0.8, 0.0], [2.5, -1.7, 0.0]]
        } else {
            vec![[0.31, 0.47, 0.23], [-1.3, 0.8, -0.6], [2.5, -1.7, 0.9]]
        };
        let eval = |v: &[f64]| eval_dl_field(&expand(v, &inf).unwrap(), &inf, &pts).unwrap();
        let (ux, uy, uz) = (eval(&x), eval(&y), eval(&z));
        for k in 0..pts.len() {
            lin = lin.max((uz[k] - 2.0 * ux[k] + 0.5 * uy[k]).abs() / (1.0 + uz[k].abs()));
        }
        let st = TraceField::single_trace(&inf, |i| 2.0 - inf.base().vertex(i)[0]);
        single = single.max(eval_dl_field(&st, &inf, &pts).unwrap().iter().fold(0.0f64, |m, u| m.max(u.abs())));

        let field = expand(&x, &inf).unwrap();
        let h = inf.base().mesh_size();
        let bary: Vec<f64> = if inf.dim() == 2 { vec![0.37, 0.63] } else { vec![0.29, 0.33, 0.38] };
        let mut checked = 0;
        for t in (0..inf.oriented_facets().len()).step_by(2) {
            let expect = field.eval(&inf, t + 1, &bary) - field.eval(&inf, t, &bary);
            if expect.abs() < 0.1 || checked == 10 {
                continue;
            }
            let got = jump_across(&field, &inf, t, &bary, 1e-3 * h).unwrap();
            jump = jump.max((got - expect).abs() / expect.abs());
            checked += 1;
        }
        jumps_checked &= checked == 10;

        let dir = if inf.dim() == 2 { [0.6, 0.8, 0.0] } else { [0.48, 0.6, 0.64] };
        let rs = [10.0, 20.0, 40.0];
        let ray: Vec<[f64; 3]> = rs.iter().map(|r| [r * dir[0], r * dir[1], r * dir[2]]).collect();
        let u = eval_dl_field(&field, &inf, &ray).unwrap();
        let s: Vec<f64> = u.iter().zip(rs).map(|(u, r)| u.abs() * r).collect();
        far &= (s[2] - s[1]).abs() < (s[1] - s[0]).abs() && s.iter().all(|v| *v <= 1.5 * s[0]);
    }
    all(&[
        (lin <= 1e-12, format!("linearity {lin:.1e}")),
        (single <= 1e-8, format!("single trace {single:.1e} (need <= 1e-8)")),
        (jumps_checked && jump <= 0.01, format!("jump at 10 barycenters {:.2}% (need <= 1%)", 100.0 * jump)),
        (far, format!("|U| |x| bounded at 10/20/40: {far}")),
    ])
}

struct Nested {
    w: Mat<f64>,
    prec: SchwarzPreconditioner,
    b: Vec<f64>,
}

fn nested(name: &str, c: usize, k: usize) -> Nested {
    let pair = refine_uniform_times(&level(name, c), k);
    let fine = inflate(&pair.fine).unwrap();
    let cinf = inflate(&pair.coarse).unwrap();
    let cfg = QuadratureConfig::default();
    let w = assemble_w(&fine, &cfg).unwrap();
    let r = build_prolongation(&pair, &cinf, &fine).unwrap();
    let prec = SchwarzPreconditioner::build(&w, &partition_dofs(&pair, &fine).unwrap(), Some(&r)).unwrap();
    let gv = if fine.dim() == 2 { [0.3, 1.0, 0.0] } else { [0.2, -0.5, 1.0] };
    let b = assemble_rhs(&fine, &|_| gv, &cfg).unwrap();
    Nested { w, prec, b }
}

fn schwarz_suite() -> Check {
    let mut lmax_ok = true;
    let mut worst_ratio: f64 = 0.0;
    for (name, c, k) in [("threefold", 1, 2), ("plus", 1, 3), ("bowtie", 1, 2), ("square", 0, 2)] {
        let s = nested(name, c, k);
        let spec = condition_number(&s.w, Some(&s.prec)).unwrap();
        let count = s.prec.num_subspaces() as f64;
        lmax_ok &= spec.lambda_max <= count;
        worst_ratio = worst_ratio.max(spec.lambda_max / count);
    }
    let mut exact: f64 = 0.0;
    for name in ["threefold", "bowtie"] {
        let s = nested(name, 0, 2);
        exact = exact.max((condition_number(&s.w, Some(&ExactInverse::new(&s.w).unwrap())).unwrap().kappa - 1.0).abs());
    }
    let mut lmin = f64::INFINITY;
    for name in ["plus", "threefold", "bowtie", "square"] {
        let s = nested(name, 1, 0);
        lmin = lmin.min(condition_number(&s.w, Some(&s.prec)).unwrap().lambda_min);
    }
    let s = nested("threefold", 1, 2);
    let n = s.w.nrows();
    let m = materialize(&s.prec);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut apply: f64 = 0.0;
    for _ in 0..5 {
        let r: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let z = s.prec.apply(&r);
        let scale = z.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for (i, zi) in z.iter().enumerate() {
            let mi: f64 = (0..n).map(|j| m[(i, j)] * r[j]).sum();
            apply = apply.max((mi - zi).abs() / scale);
        }
    }
    all(&[
        (lmax_ok, format!("max lambda_max / subspaces = {worst_ratio:.6} (need <= 1)")),
        (exact <= 1e-10, format!("exact inverse |kappa - 1| = {exact:.1e} (need <= 1e-10)")),
        (lmin >= 1.0, format!("H = h lambda_min = {lmin:.6} (need >= 1)")),
        (n <= 200 && apply <= 1e-12, format!("materialized vs apply {apply:.1e} on {n} DOFs (need <= 1e-12)")),
    ])
}

fn pcg_suite() -> Check {
    let tol = 1e-8;
    let mut direct: f64 = 0.0;
    let mut bound = true;
    let mut lanczos_lo: f64 = f64::INFINITY;
    let mut lanczos_hi: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, c, k) in [("threefold", 1, 3), ("plus", 0, 3), ("bowtie", 1, 1)] {
        let p = nested(name, c, k);
        let x = direct_solve(&p.w, &p.b).unwrap();
        let xn = dot(&x, &matvec(&p.w, &x)).sqrt();
        let generic: Vec<f64> = (0..p.b.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        for prec in [None, Some(&p.prec as &dyn Preconditioner)] {
            let rep = pcg(&p.w, prec, &p.b, tol, 1000, None).unwrap();
            let e: Vec<f64> = rep.solution.iter().zip(&x).map(|(a, b)| a - b).collect();
            direct = direct.max(dot(&e, &matvec(&p.w, &e)).sqrt() / xn / tol);

            let kappa = condition_number(&p.w, prec).unwrap().kappa;
            let rho = (kappa.sqrt() - 1.0) / (kappa.sqrt() + 1.0);
            let rep = pcg(&p.w, prec, &p.b, 1e-12, 1000, Some(&x)).unwrap();
            let hist = rep.energy_error_history.unwrap();
            bound &= hist.iter().enumerate().all(|(n, e)| *e <= 2.0 * rho.powi(n as i32) * hist[0] + 1e-12 * hist[0]);

            let rep = pcg(&p.w, prec, &generic, 1e-12, 1000, None).unwrap();
            let ratio = rep.kappa_estimate / kappa;
            lanczos_lo = lanczos_lo.min(ratio);
            lanczos_hi = lanczos_hi.max(ratio);
        }
    }
    all(&[
        (direct <= 10.0, format!("W-norm error vs direct = {direct:.2} x tol (need <= 10)")),
        (bound, format!("energy error <= 2 rho^n: {bound}")),
        (
            lanczos_lo >= 0.95 && lanczos_hi <= 1.0 + 1e-8,
            format!("Lanczos / dense kappa in [{lanczos_lo:.4}, {lanczos_hi:.4}] (need [0.95, 1])"),
        ),
    ])
}

fn main() {
    let mut report = Report { failures: 0 };

    let (c, t) = timed(experiment1);
    report.line("1", "plus-shape convergence orders", (c.0 && t < 120.0, c.1), t);

    let (res2, t2) = timed(|| {
        experiments::cmd_experiment2(&ExperimentConfig { out: out_dir("exp2"), ..ExperimentConfig::experiment2() })
            .unwrap()
    });
    let slope = res2.fits[0].unprec_slope;
    let rows = res2.rows.len();
    report.line(
        "2",
        "threefold unpreconditioned conditioning",
        ((-1.3..=-0.7).contains(&slope) && rows >= 5 && t2 < 120.0, format!("slope {slope:.3} (need [-1.3, -0.7]) over {rows} levels")),
        t2,
    );
    let (a2, b2) = cond_checks(&res2);
    report.line("3a-2D", "threefold kappa_prec <= kappa_unprec", a2, t2);
    report.line("3b-2D", "threefold polylog growth law", (b2.0 && t2 < 600.0, b2.1), t2);

    let (res3, t3) = timed(|| {
        experiments::cmd_experiment3(&ExperimentConfig { out: out_dir("exp3"), ..ExperimentConfig::experiment3() })
            .unwrap()
    });
    let max_dofs = res3.rows.iter().map(|r| r.dofs).max().unwrap();
    let (a3, b3) = cond_checks(&res3);
    report.line("3a-3D", "bow-tie kappa_prec <= kappa_unprec", a3, t3);
    report.line(
        "3b-3D",
        "bow-tie polylog growth law",
        (b3.0 && max_dofs <= 4000 && t3 < 600.0, format!("{}; max DOFs {max_dofs} (need <= 4000)", b3.1)),
        t3,
    );

    let (c, t) = timed(galerkin_suite);
    report.line("4", "Galerkin matrix suite", c, t);
    let (c, t) = timed(inflation_suite);
    report.line("5", "inflation suite", c, t);
    let (c, t) = timed(potential_suite);
    report.line("6", "potential suite", c, t);
    let (c, t) = timed(schwarz_suite);
    report.line("7", "Schwarz operator spectra", c, t);
    let (c, t) = timed(pcg_suite);
    report.line("8", "PCG", c, t);

    println!("acceptance: {} failing line(s)", report.failures);
    if report.failures > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
