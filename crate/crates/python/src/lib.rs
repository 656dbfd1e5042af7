//! Python bindings: graphs, fixtures, the eikonal solver, the checks, the
//! Hamiltonian solver and the comparison harness. Fields cross the boundary
//! as `{vertex_id: value}` dicts or a single float for a constant field.

#![allow(clippy::useless_conversion)]

use std::collections::HashMap;
use std::path::PathBuf;

use eikograph::fields::{FieldRole, ScalarField};
use eikograph::hamiltonian::{solve_general, validate_hamiltonian, GeneralOptions, HamiltonianSpec};
use eikograph::metric::{build_graph, intrinsic_distance, refine, EdgeSpec, GraphSpec, MetricGraph, VertexSpec};
use eikograph::slope::{
    check_c_subsolution, check_c_supersolution, check_monge, check_regularity, default_tolerance, CheckReport,
    MongeMode,
};
use eikograph::solver::{solve_dirichlet, DirichletProblem};
use eikograph::verify::{compare as compare_fields, fixture as make_fixture, ComparisonInstance, FixtureKind};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: eikograph::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[derive(FromPyObject)]
enum FieldArg {
    Constant(f64),
    Values(HashMap<String, f64>),
}

impl FieldArg {
    fn build(&self, g: &MetricGraph, role: FieldRole) -> PyResult<ScalarField> {
        match self {
            FieldArg::Constant(c) if role == FieldRole::BoundaryData => Ok(ScalarField::constant_boundary(g, *c)),
            FieldArg::Constant(c) => Ok(ScalarField::constant(g, role, *c)),
            FieldArg::Values(map) => {
                let mut values = vec![None; g.len()];
                for (id, x) in map {
                    values[g.vertex(id).map_err(err)?] = Some(*x);
                }
                Ok(ScalarField::from_options(role, values))
            }
        }
    }
}

fn to_dict(g: &MetricGraph, field: &ScalarField) -> HashMap<String, f64> {
    (0..g.len())
        .filter_map(|v| field.get(v).map(|x| (g.id(v).to_string(), x)))
        .collect()
}

/// Finite metric graph with a boundary vertex set.
#[pyclass(name = "Graph", module = "eikograph")]
#[derive(Clone)]
struct PyGraph {
    inner: MetricGraph,
}

#[pymethods]
impl PyGraph {
    /// Build from `[(id, coords|None)]`, `[(a, b, length)]` and boundary ids.
    #[new]
    #[pyo3(signature = (vertices, edges, boundary=Vec::new()))]
    fn new(vertices: Vec<(String, Option<Vec<f64>>)>, edges: Vec<(String, String, f64)>, boundary: Vec<String>) -> PyResult<Self> {
        let spec = GraphSpec {
            version: 1,
            vertices: vertices.into_iter().map(|(id, coords)| VertexSpec { id, coords }).collect(),
            edges: edges.into_iter().map(|(a, b, length)| EdgeSpec { a, b, length }).collect(),
            boundary,
        };
        Ok(PyGraph {
            inner: build_graph(&spec).map_err(err)?,
        })
    }

    /// `"interval(200)"`, `"grid(32,8)"`, `"gasket(4)"`, ...
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        let kind: FixtureKind = name.parse().map_err(err)?;
        Ok(PyGraph {
            inner: make_fixture(kind).map_err(err)?.graph,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyGraph {
            inner: eikograph::io::read_graph(&path).map_err(err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        eikograph::io::write_graph(&self.inner, &path).map_err(err)
    }

    #[getter]
    fn ids(&self) -> Vec<String> {
        self.inner.ids().to_vec()
    }

    #[getter]
    fn boundary(&self) -> Vec<String> {
        self.inner.boundary().map(|v| self.inner.id(v).to_string()).collect()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn max_edge_length(&self) -> f64 {
        self.inner.max_edge_length()
    }

    fn coords(&self, id: &str) -> PyResult<Option<Vec<f64>>> {
        let v = self.inner.vertex(id).map_err(err)?;
        Ok(self.inner.coords(v).map(<[f64]>::to_vec))
    }

    /// Intrinsic distance and the vertex ids of a shortest path.
    fn distance(&self, x: &str, y: &str) -> PyResult<(f64, Vec<String>)> {
        let (d, curve) = intrinsic_distance(
            &self.inner,
            self.inner.vertex(x).map_err(err)?,
            self.inner.vertex(y).map_err(err)?,
        );
        Ok((d, curve.vertices().iter().map(|&v| self.inner.id(v).to_string()).collect()))
    }

    fn refine(&self, h_max: f64) -> PyResult<Self> {
        if !(h_max > 0.0) {
            return Err(PyValueError::new_err("h_max must be positive"));
        }
        Ok(PyGraph {
            inner: refine(&self.inner, h_max),
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(vertices={}, edges={}, boundary={})",
            self.inner.len(),
            self.inner.edge_count(),
            self.inner.boundary_count()
        )
    }
}

#[pyclass(name = "Solution", module = "eikograph", get_all)]
struct PySolution {
    u: HashMap<String, f64>,
    exit: HashMap<String, String>,
    /// Boundary vertices only: whether `u = ζ` there.
    attained: HashMap<String, bool>,
}

#[pyclass(name = "Report", module = "eikograph", get_all)]
struct PyReport {
    check: String,
    passed: bool,
    tolerance: f64,
    max_residual: f64,
    worst: Option<String>,
    /// `(item_id, residual, verdict)`
    items: Vec<(String, f64, String)>,
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        let worst = self.worst.as_ref().map_or("None".to_string(), |w| format!("'{w}'"));
        let passed = if self.passed { "True" } else { "False" };
        format!(
            "Report(check='{}', passed={passed}, max_residual={}, worst={worst})",
            self.check, self.max_residual
        )
    }
}

impl From<CheckReport> for PyReport {
    fn from(r: CheckReport) -> Self {
        PyReport {
            max_residual: r.max_residual(),
            worst: r.worst.as_ref().map(|w| w.id.clone()),
            items: r
                .items
                .iter()
                .map(|i| (i.id.clone(), i.residual, i.verdict.to_string()))
                .collect(),
            check: r.check,
            passed: r.pass,
            tolerance: r.tolerance,
        }
    }
}

/// Solve `|∇u| = f` with `u = ζ` on the boundary.
#[pyfunction]
#[pyo3(signature = (graph, f, zeta, threshold=1e-9))]
fn solve(graph: &PyGraph, f: FieldArg, zeta: FieldArg, threshold: f64) -> PyResult<PySolution> {
    let g = &graph.inner;
    let f = f.build(g, FieldRole::Rhs)?;
    let zeta = zeta.build(g, FieldRole::BoundaryData)?;
    let vf = solve_dirichlet(&DirichletProblem::new(g, &f, &zeta).with_threshold(threshold)).map_err(err)?;
    Ok(PySolution {
        u: to_dict(g, &vf.u),
        exit: (0..g.len())
            .map(|v| (g.id(v).to_string(), g.id(vf.exit[v]).to_string()))
            .collect(),
        attained: (0..g.len())
            .filter_map(|v| vf.attained[v].map(|a| (g.id(v).to_string(), a)))
            .collect(),
    })
}

/// Run one check: `"monge"`, `"csub"`, `"csuper"` or `"regularity"`.
#[pyfunction]
#[pyo3(signature = (graph, kind, u, f=None, tol=None, mode="full"))]
fn check(graph: &PyGraph, kind: &str, u: FieldArg, f: Option<FieldArg>, tol: Option<f64>, mode: &str) -> PyResult<PyReport> {
    let g = &graph.inner;
    let u = u.build(g, FieldRole::Solution)?;
    let f = f.map(|f| f.build(g, FieldRole::Rhs)).transpose()?;
    let need_f = || f.as_ref().ok_or_else(|| PyValueError::new_err(format!("{kind} needs f")));
    let default = match &f {
        Some(f) => default_tolerance(g, f).map_err(err)?,
        None => eikograph::slope::BASE_TOL,
    };
    let report = match kind {
        "monge" => {
            let mode: MongeMode = mode.parse().map_err(err)?;
            check_monge(g, &u, need_f()?, tol.unwrap_or(default), mode)
        }
        "csub" => check_c_subsolution(g, &u, need_f()?, tol.unwrap_or(0.0)),
        "csuper" => check_c_supersolution(g, &u, need_f()?, tol.unwrap_or(default)),
        "regularity" => check_regularity(g, &u, tol.unwrap_or(default)),
        other => return Err(PyValueError::new_err(format!("unknown check {other:?}"))),
    }
    .map_err(err)?;
    Ok(report.into())
}

/// Validate, then solve `H(x, u, |∇u|) = 0`. Returns `(u, iterations)`.
#[pyfunction]
#[pyo3(signature = (graph, hamiltonian, zeta, tol=1e-8, max_iter=100))]
fn solve_h(graph: &PyGraph, hamiltonian: &str, zeta: FieldArg, tol: f64, max_iter: usize) -> PyResult<(HashMap<String, f64>, usize)> {
    let g = &graph.inner;
    let h: HamiltonianSpec = hamiltonian.parse().map_err(err)?;
    let zeta = zeta.build(g, FieldRole::BoundaryData)?;
    let report = validate_hamiltonian(&h, g, (zeta.min() - 1.0, zeta.max() + 1.0), 8).map_err(err)?;
    if !report.pass {
        let why = report.counterexample.map(|c| c.to_string()).unwrap_or_default();
        return Err(PyValueError::new_err(format!("{} rejected: {why}", h.name)));
    }
    let opts = GeneralOptions {
        tol,
        max_iter,
        ..GeneralOptions::default()
    };
    let sol = solve_general(g, &h, &zeta, opts).map_err(err)?;
    Ok((to_dict(g, &sol.value.u), sol.iterations))
}

/// Structural checks on a Hamiltonian: `(passed, counterexample or None)`.
#[pyfunction]
#[pyo3(signature = (graph, hamiltonian, rho_min=-1.0, rho_max=1.0, samples=8))]
fn validate(graph: &PyGraph, hamiltonian: &str, rho_min: f64, rho_max: f64, samples: usize) -> PyResult<(bool, Option<String>)> {
    let h: HamiltonianSpec = hamiltonian.parse().map_err(err)?;
    let r = validate_hamiltonian(&h, &graph.inner, (rho_min, rho_max), samples).map_err(err)?;
    Ok((r.pass, r.counterexample.map(|c| c.to_string())))
}

/// Comparison harness: `"Pass"`, `"Violation"` or `"HypothesisFailed"`, with
/// the first failed hypothesis.
#[pyfunction]
fn compare(graph: &PyGraph, f: FieldArg, u: FieldArg, v: FieldArg) -> PyResult<(String, Option<String>)> {
    let g = &graph.inner;
    let f = f.build(g, FieldRole::Rhs)?;
    let u = u.build(g, FieldRole::Solution)?;
    let v = v.build(g, FieldRole::Solution)?;
    let rep = compare_fields(&ComparisonInstance::new(g, &f, &u, &v)).map_err(err)?;
    Ok((format!("{:?}", rep.verdict), rep.first_failed))
}

#[pymodule]
#[pyo3(name = "eikograph")]
fn eikograph_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(solve_h, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add("DEFAULT_SEED", eikograph::DEFAULT_SEED)?;
    Ok(())
}
