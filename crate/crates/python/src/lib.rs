//! Python bindings: meshes, inflation, Galerkin assembly, the two-level
//! preconditioner and the solvers.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use screenbem_core::assembly::{self, QuadratureConfig};
use screenbem_core::experiments::{self, ExperimentConfig};
use screenbem_core::mesh::{self as core_mesh, SurfaceMesh};
use screenbem_core::multiscreen::{self, InflatedMesh};
use screenbem_core::{potential, precond, solver, Error};

fn to_py(e: Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn quad(far_order: usize, singular_order: usize) -> QuadratureConfig {
    QuadratureConfig { far_order, singular_order, ..QuadratureConfig::default() }
}

fn point(p: &[f64]) -> PyResult<[f64; 3]> {
    if p.is_empty() || p.len() > 3 {
        return Err(PyValueError::new_err("points need 1 to 3 coordinates"));
    }
    let mut x = [0.0; 3];
    x[..p.len()].copy_from_slice(p);
    Ok(x)
}

/// A segment (2D) or triangle (3D) surface mesh.
#[pyclass(name = "Mesh", module = "screenbem", skip_from_py_object)]
#[derive(Clone)]
struct PyMesh {
    inner: SurfaceMesh,
}

#[pymethods]
impl PyMesh {
    #[new]
    fn new(dim: usize, vertices: Vec<Vec<f64>>, facets: Vec<Vec<usize>>) -> PyResult<Self> {
        let vertices = vertices.iter().map(|p| point(p)).collect::<PyResult<Vec<_>>>()?;
        Ok(PyMesh { inner: SurfaceMesh::new(dim, vertices, facets).map_err(to_py)? })
    }

    /// Builtin geometry such as `"plus"`, `"threefold:n=2"` or `"bowtie"`.
    #[staticmethod]
    fn builtin(spec: &str) -> PyResult<Self> {
        Ok(PyMesh { inner: core_mesh::builtin(spec).map_err(to_py)? })
    }

    /// Mesh file path or builtin spec.
    #[staticmethod]
    fn load(source: &str) -> PyResult<Self> {
        Ok(PyMesh { inner: core_mesh::resolve_geometry(source).map_err(to_py)? })
    }

    /// Uniform refinement applied `times` times.
    #[pyo3(signature = (times = 1))]
    fn refine(&self, times: usize) -> Self {
        PyMesh { inner: core_mesh::refine_uniform_times(&self.inner, times).fine }
    }

    /// Moves the nodes of every arm toward the given corner points (2D).
    fn graded(&self, corners: Vec<Vec<f64>>, exponent: f64) -> PyResult<Self> {
        let corners = corners.iter().map(|p| point(p)).collect::<PyResult<Vec<_>>>()?;
        Ok(PyMesh { inner: core_mesh::refine_graded(&self.inner, &corners, exponent).map_err(to_py)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.inner.num_vertices()
    }

    #[getter]
    fn num_facets(&self) -> usize {
        self.inner.num_facets()
    }

    #[getter]
    fn mesh_size(&self) -> f64 {
        self.inner.mesh_size()
    }

    fn vertices(&self) -> Vec<Vec<f64>> {
        self.inner.vertices().iter().map(|p| p[..self.inner.dim()].to_vec()).collect()
    }

    fn facets(&self) -> Vec<Vec<usize>> {
        self.inner.facets().map(<[usize]>::to_vec).collect()
    }

    fn boundary_vertices(&self) -> Vec<usize> {
        self.inner.boundary_vertices()
    }

    /// Text in the ASCII mesh format.
    fn to_ascii(&self) -> String {
        self.inner.write_ascii()
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh(dim={}, vertices={}, facets={})",
            self.inner.dim(),
            self.inner.num_vertices(),
            self.inner.num_facets()
        )
    }
}

/// The inflated mesh with its generalized vertices and jump DOFs.
#[pyclass(name = "InflatedMesh", module = "screenbem")]
struct PyInflated {
    inner: InflatedMesh,
}

#[pymethods]
impl PyInflated {
    #[getter]
    fn num_dofs(&self) -> usize {
        self.inner.num_dofs()
    }

    #[getter]
    fn num_oriented_facets(&self) -> usize {
        self.inner.oriented_facets().len()
    }

    /// Branch count per vertex.
    fn q(&self) -> Vec<usize> {
        self.inner.q().to_vec()
    }

    /// `(vertex, branch)` of every jump DOF in order.
    fn jump_dofs(&self) -> Vec<(usize, usize)> {
        self.inner.jump_dofs().to_vec()
    }

    /// Sorted oriented-facet ids of each branch of every vertex.
    fn branches(&self) -> Vec<(usize, usize, Vec<usize>)> {
        self.inner.generalized_vertices().iter().map(|g| (g.vertex, g.branch, g.alpha.clone())).collect()
    }

    fn summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.inner.summary();
        let d = PyDict::new(py);
        d.set_item("vertices", s.vertices)?;
        d.set_item("facets", s.facets)?;
        d.set_item("oriented_facets", s.oriented_facets)?;
        d.set_item("q_histogram", s.q_histogram.into_iter().collect::<Vec<_>>())?;
        d.set_item("jump_dofs", s.jump_dofs)?;
        Ok(d)
    }

    fn mesh(&self) -> PyMesh {
        PyMesh { inner: self.inner.base().clone() }
    }
}

#[pyfunction]
fn inflate(mesh: &PyMesh) -> PyResult<PyInflated> {
    Ok(PyInflated { inner: multiscreen::inflate(&mesh.inner).map_err(to_py)? })
}

fn rows(m: &faer::Mat<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn mat(rows: &[Vec<f64>]) -> PyResult<faer::Mat<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(faer::Mat::from_fn(n, n, |i, j| rows[i][j]))
}

/// Dense Galerkin matrix of the hypersingular form, as a list of rows.
#[pyfunction]
#[pyo3(signature = (inflated, far_order = 4, singular_order = 12))]
fn assemble_w(inflated: &PyInflated, far_order: usize, singular_order: usize) -> PyResult<Vec<Vec<f64>>> {
    Ok(rows(&assembly::assemble_w(&inflated.inner, &quad(far_order, singular_order)).map_err(to_py)?))
}

/// Load vector for Neumann data `g·n` with a constant vector `g`.
#[pyfunction]
#[pyo3(signature = (inflated, g, far_order = 4))]
fn assemble_rhs(inflated: &PyInflated, g: Vec<f64>, far_order: usize) -> PyResult<Vec<f64>> {
    let gv = point(&g)?;
    assembly::assemble_rhs(&inflated.inner, &|_| gv, &quad(far_order, 12)).map_err(to_py)
}

/// Preconditioned conjugate gradients; returns a dict with the solution,
/// iteration count, residual history and Lanczos condition estimate.
#[pyfunction]
#[pyo3(signature = (w, b, tol = 1e-8, maxit = 1000))]
fn pcg<'py>(py: Python<'py>, w: Vec<Vec<f64>>, b: Vec<f64>, tol: f64, maxit: usize) -> PyResult<Bound<'py, PyDict>> {
    let w = mat(&w)?;
    let r = solver::pcg(&w, None, &b, tol, maxit, None).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("solution", r.solution)?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("converged", r.converged)?;
    d.set_item("residual_history", r.residual_history)?;
    d.set_item("kappa_estimate", r.kappa_estimate)?;
    Ok(d)
}

#[pyfunction]
fn direct_solve(w: Vec<Vec<f64>>, b: Vec<f64>) -> PyResult<Vec<f64>> {
    solver::direct_solve(&mat(&w)?, &b).map_err(to_py)
}

/// `(lambda_min, lambda_max, kappa)` of a symmetric positive definite matrix.
#[pyfunction]
fn condition_number(w: Vec<Vec<f64>>) -> PyResult<(f64, f64, f64)> {
    let s = precond::condition_number(&mat(&w)?, None).map_err(to_py)?;
    Ok((s.lambda_min, s.lambda_max, s.kappa))
}

/// Conditioning with and without the two-level preconditioner for `coarse`
/// refined `refinements` times.
#[pyfunction]
#[pyo3(signature = (coarse, refinements, far_order = 4, singular_order = 12))]
fn cond<'py>(
    py: Python<'py>,
    coarse: &PyMesh,
    refinements: usize,
    far_order: usize,
    singular_order: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let r = experiments::cond_row(&coarse.inner, refinements, &quad(far_order, singular_order)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("H", r.coarse_h)?;
    d.set_item("h", r.h)?;
    d.set_item("dofs", r.dofs)?;
    d.set_item("kappa_unprec", r.kappa_unprec)?;
    d.set_item("kappa_prec", r.kappa_prec)?;
    d.set_item("lambda_min", r.lambda_min)?;
    d.set_item("lambda_max", r.lambda_max)?;
    Ok(d)
}

/// Solves the screen problem for a builtin spec or mesh file; returns the
/// jump coefficients and the PCG statistics.
#[pyfunction]
#[pyo3(signature = (geometry, levels = 1, g = None, coarse_level = None, tol = 1e-8))]
fn solve<'py>(
    py: Python<'py>,
    geometry: &str,
    levels: usize,
    g: Option<Vec<f64>>,
    coarse_level: Option<usize>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let config = ExperimentConfig {
        geometry: geometry.to_string(),
        levels,
        g,
        coarse_levels: coarse_level.into_iter().collect(),
        tol,
        ..ExperimentConfig::default()
    };
    let sol = experiments::solve(&config).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("density", sol.density.clone())?;
    d.set_item("jump_dofs", sol.inflated.jump_dofs().to_vec())?;
    d.set_item("iterations", sol.report.iterations)?;
    d.set_item("converged", sol.report.converged)?;
    d.set_item("preconditioner", sol.preconditioner.clone())?;
    Ok(d)
}

/// Double-layer potential of a jump vector at points off the screen.
#[pyfunction]
fn eval_potential(inflated: &PyInflated, density: Vec<f64>, points: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let pts = points.iter().map(|p| point(p)).collect::<PyResult<Vec<_>>>()?;
    let field = screenbem_core::jump::expand(&density, &inflated.inner).map_err(to_py)?;
    potential::eval_dl_field(&field, &inflated.inner, &pts).map_err(to_py)
}

/// Exact potential of the unit slit with Neumann data `-1/2 n_y`.
#[pyfunction]
fn exact_slit_potential(x: f64, y: f64) -> PyResult<f64> {
    potential::exact_plus_value([x, y, 0.0]).map_err(to_py)
}

#[pymodule]
fn screenbem(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PyInflated>()?;
    m.add_function(wrap_pyfunction!(inflate, m)?)?;
    m.add_function(wrap_pyfunction!(assemble_w, m)?)?;
    m.add_function(wrap_pyfunction!(assemble_rhs, m)?)?;
    m.add_function(wrap_pyfunction!(pcg, m)?)?;
    m.add_function(wrap_pyfunction!(direct_solve, m)?)?;
    m.add_function(wrap_pyfunction!(condition_number, m)?)?;
    m.add_function(wrap_pyfunction!(cond, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(eval_potential, m)?)?;
    m.add_function(wrap_pyfunction!(exact_slit_potential, m)?)?;
    Ok(())
}
