//! Canonical fixtures, the comparison-principle harness and the end-to-end
//! equivalence suite.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{lipschitz_constant, validate_field, FieldRole, ScalarField, DEFAULT_POSITIVITY_THRESHOLD};
use crate::metric::{build_graph, refine_mapped, EdgeSpec, GraphSpec, MetricGraph, VertexSpec, ABS_TOL};
use crate::slope::{
    check_c_subsolution, check_c_supersolution, check_monge, check_regularity, CheckReport, MongeMode, BASE_TOL,
};
use crate::hamiltonian::{check_monge_hamiltonian, validate_hamiltonian, HamiltonianSpec};
use crate::slope::slopes;
use crate::solver::{solve_dirichlet, DirichletProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FixtureKind {
    /// `[-1, 1]` split into `n` equal segments; boundary `{-1, 1}`.
    Interval { n: usize },
    /// Regular `n`-gon inscribed in the unit circle; no boundary.
    Circle { n: usize },
    /// `n × n` lattice on the unit square; boundary is the outer ring.
    Grid { n: usize, connectivity: u8 },
    /// Complete binary tree with unit edges; boundary is the leaves.
    BinaryTree { depth: usize },
    /// Level-k Sierpinski gasket graph with unit outer side; boundary is
    /// the three outer corners.
    Gasket { level: u32 },
}

impl fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixtureKind::Interval { n } => write!(f, "interval({n})"),
            FixtureKind::Circle { n } => write!(f, "circle({n})"),
            FixtureKind::Grid { n, connectivity } => write!(f, "grid({n},{connectivity})"),
            FixtureKind::BinaryTree { depth } => write!(f, "binary_tree({depth})"),
            FixtureKind::Gasket { level } => write!(f, "gasket({level})"),
        }
    }
}

impl FromStr for FixtureKind {
    type Err = Error;

    /// `interval(200)`, `circle(1000)`, `grid(32)`, `grid(32,8)`,
    /// `binary_tree(5)`, `gasket(4)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid fixture {s:?}"));
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args: Vec<usize> = rest
            .strip_suffix(')')
            .ok_or_else(bad)?
            .split(',')
            .map(|a| a.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (name.trim(), args.as_slice()) {
            ("interval", [n]) => Ok(FixtureKind::Interval { n: *n }),
            ("circle", [n]) => Ok(FixtureKind::Circle { n: *n }),
            ("grid", [n]) => Ok(FixtureKind::Grid { n: *n, connectivity: 4 }),
            ("grid", [n, c]) => Ok(FixtureKind::Grid {
                n: *n,
                connectivity: *c as u8,
            }),
            ("binary_tree" | "binary-tree", [d]) => Ok(FixtureKind::BinaryTree { depth: *d }),
            ("gasket", [k]) => Ok(FixtureKind::Gasket { level: *k as u32 }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub kind: FixtureKind,
    pub graph: MetricGraph,
    /// Analytic distance to the boundary with `f ≡ 1`, when known in closed form.
    pub reference: Option<ScalarField>,
}

pub fn fixture(kind: FixtureKind) -> Result<Fixture> {
    let (spec, reference): (GraphSpec, Option<Vec<f64>>) = match kind {
        FixtureKind::Interval { n } => {
            positive(n, "interval size")?;
            let spec = interval_spec(n);
            let r = spec
                .vertices
                .iter()
                .map(|v| 1.0 - v.coords.as_ref().unwrap()[0].abs())
                .collect();
            (spec, Some(r))
        }
        FixtureKind::Circle { n } => {
            if n < 3 {
                return Err(Error::Validation("circle needs at least 3 points".into()));
            }
            (circle_spec(n), None)
        }
        FixtureKind::Grid { n, connectivity } => {
            if n < 2 {
                return Err(Error::Validation("grid needs n >= 2".into()));
            }
            if connectivity != 4 && connectivity != 8 {
                return Err(Error::Validation("grid connectivity is 4 or 8".into()));
            }
            (grid_spec(n, connectivity), None)
        }
        FixtureKind::BinaryTree { depth } => {
            positive(depth, "tree depth")?;
            (tree_spec(depth), None)
        }
        FixtureKind::Gasket { level } => {
            if level > 12 {
                return Err(Error::Validation("gasket level above 12 is too large".into()));
            }
            (gasket_spec(level), None)
        }
    };
    let graph = build_graph(&spec)?;
    Ok(Fixture {
        name: kind.to_string(),
        kind,
        reference: reference.map(|r| ScalarField::new(FieldRole::Solution, r)),
        graph,
    })
}

fn positive(n: usize, what: &str) -> Result<()> {
    if n == 0 {
        Err(Error::Validation(format!("{what} must be positive")))
    } else {
        Ok(())
    }
}

fn vertex(id: String, coords: Vec<f64>) -> VertexSpec {
    VertexSpec {
        id,
        coords: Some(coords),
    }
}

fn edge(a: &str, b: &str, length: f64) -> EdgeSpec {
    EdgeSpec {
        a: a.to_string(),
        b: b.to_string(),
        length,
    }
}

fn interval_spec(n: usize) -> GraphSpec {
    // ids are offsets from the midpoint when n is even, so "0" sits at x = 0
    let id = |k: usize| {
        if n.is_multiple_of(2) {
            (k as i64 - (n / 2) as i64).to_string()
        } else {
            k.to_string()
        }
    };
    let h = 2.0 / n as f64;
    GraphSpec {
        version: 1,
        vertices: (0..=n)
            .map(|k| vertex(id(k), vec![-1.0 + 2.0 * k as f64 / n as f64]))
            .collect(),
        edges: (0..n).map(|k| edge(&id(k), &id(k + 1), h)).collect(),
        boundary: vec![id(0), id(n)],
    }
}

fn circle_spec(n: usize) -> GraphSpec {
    let chord = 2.0 * (std::f64::consts::PI / n as f64).sin();
    GraphSpec {
        version: 1,
        vertices: (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                vertex(k.to_string(), vec![t.cos(), t.sin()])
            })
            .collect(),
        edges: (0..n)
            .map(|k| edge(&k.to_string(), &((k + 1) % n).to_string(), chord))
            .collect(),
        boundary: vec![],
    }
}

fn grid_spec(n: usize, connectivity: u8) -> GraphSpec {
    let h = 1.0 / (n - 1) as f64;
    let id = |i: usize, j: usize| format!("{i}_{j}");
    let mut vertices = Vec::with_capacity(n * n);
    let mut edges = Vec::new();
    let mut boundary = Vec::new();
    for j in 0..n {
        for i in 0..n {
            vertices.push(vertex(id(i, j), vec![i as f64 * h, j as f64 * h]));
            if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                boundary.push(id(i, j));
            }
            if i + 1 < n {
                edges.push(edge(&id(i, j), &id(i + 1, j), h));
            }
            if j + 1 < n {
                edges.push(edge(&id(i, j), &id(i, j + 1), h));
            }
            if connectivity == 8 && i + 1 < n && j + 1 < n {
                edges.push(edge(&id(i, j), &id(i + 1, j + 1), h * std::f64::consts::SQRT_2));
                edges.push(edge(&id(i + 1, j), &id(i, j + 1), h * std::f64::consts::SQRT_2));
            }
        }
    }
    GraphSpec {
        version: 1,
        vertices,
        edges,
        boundary,
    }
}

fn tree_spec(depth: usize) -> GraphSpec {
    let count = (1usize << (depth + 1)) - 1;
    let first_leaf = 1usize << depth;
    let level = |k: usize| usize::BITS as usize - 1 - k.leading_zeros() as usize;
    // in-order position gives a planar layout
    let x = |k: usize| {
        let l = level(k);
        let offset = k - (1 << l);
        let span = 1usize << (depth - l);
        (offset * 2 + 1) as f64 * span as f64 / 2.0
    };
    let id = |k: usize| format!("n{k}");
    GraphSpec {
        version: 1,
        vertices: (1..=count).map(|k| vertex(id(k), vec![x(k), -(level(k) as f64)])).collect(),
        edges: (2..=count).map(|k| edge(&id(k / 2), &id(k), 1.0)).collect(),
        boundary: (first_leaf..=count).map(id).collect(),
    }
}

fn gasket_spec(level: u32) -> GraphSpec {
    let side = 1i64 << level;
    let s = 1.0 / side as f64;
    // upward triangles (i, j, size) in lattice units
    let mut triangles = vec![(0i64, 0i64, side)];
    for _ in 0..level {
        triangles = triangles
            .into_iter()
            .flat_map(|(i, j, t)| {
                let h = t / 2;
                [(i, j, h), (i + h, j, h), (i, j + h, h)]
            })
            .collect();
    }
    let mut points: Vec<(i64, i64)> = triangles
        .iter()
        .flat_map(|&(i, j, t)| [(i, j), (i + t, j), (i, j + t)])
        .collect();
    points.sort_by_key(|&(i, j)| (j, i));
    points.dedup();
    let id = |(i, j): (i64, i64)| format!("g{i}_{j}");
    let height = 3f64.sqrt() / 2.0;
    let vertices = points
        .iter()
        .map(|&(i, j)| vertex(id((i, j)), vec![(i as f64 + j as f64 / 2.0) * s, j as f64 * height * s]))
        .collect();
    let edges = triangles
        .iter()
        .flat_map(|&(i, j, t)| {
            let (a, b, c) = ((i, j), (i + t, j), (i, j + t));
            [(a, b), (b, c), (a, c)]
        })
        .map(|(p, q)| edge(&id(p), &id(q), s))
        .collect();
    GraphSpec {
        version: 1,
        vertices,
        edges,
        boundary: vec![id((0, 0)), id((side, 0)), id((0, side))],
    }
}

/// Default boundary band for the comparison hypothesis: `2 · h_max`.
pub fn default_band(g: &MetricGraph) -> f64 {
    2.0 * g.max_edge_length()
}

#[derive(Debug, Clone)]
pub struct ComparisonInstance<'a> {
    pub graph: &'a MetricGraph,
    pub f: &'a ScalarField,
    pub u_sub: &'a ScalarField,
    pub v_super: &'a ScalarField,
    /// Width `δ` of the band `d(x, ∂Ω) ≤ δ` where `u ≤ v` is assumed.
    pub band: f64,
    /// Tolerance for `u ≤ v` in the band and in the conclusion.
    pub tol: f64,
    /// Tolerance for the Monge sub/super preconditions.
    pub check_tol: f64,
}

impl<'a> ComparisonInstance<'a> {
    pub fn new(graph: &'a MetricGraph, f: &'a ScalarField, u_sub: &'a ScalarField, v_super: &'a ScalarField) -> Self {
        ComparisonInstance {
            graph,
            f,
            u_sub,
            v_super,
            band: default_band(graph),
            tol: ABS_TOL,
            check_tol: crate::slope::default_tolerance(graph, f).unwrap_or(BASE_TOL),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ComparisonVerdict {
    /// Hypotheses hold and `u ≤ v` everywhere.
    Pass,
    /// Hypotheses hold but `u > v` somewhere.
    Violation,
    /// A hypothesis failed; no comparison verdict is issued.
    HypothesisFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub hypotheses: Vec<Hypothesis>,
    pub first_failed: Option<String>,
    /// `max (u − v)` over all vertices.
    pub max_difference: f64,
    /// Vertex where `u − v` is largest, when it exceeds the tolerance.
    pub violation: Option<(String, f64)>,
    pub verdict: ComparisonVerdict,
}

pub fn compare(inst: &ComparisonInstance<'_>) -> Result<ComparisonReport> {
    let g = inst.graph;
    let u = inst.u_sub.dense(g)?;
    let v = inst.v_super.dense(g)?;

    let mut hypotheses = Vec::new();
    let positivity = validate_field(g, inst.f, DEFAULT_POSITIVITY_THRESHOLD);
    hypotheses.push(Hypothesis {
        name: "positivity".into(),
        pass: positivity.pass,
        detail: format!("inf f = {}", inst.f.min()),
    });
    let sub = check_monge(g, inst.u_sub, inst.f, inst.check_tol, MongeMode::Sub)?;
    hypotheses.push(monge_hypothesis("subsolution", &sub));
    let sup = check_monge(g, inst.v_super, inst.f, inst.check_tol, MongeMode::Super)?;
    hypotheses.push(monge_hypothesis("supersolution", &sup));

    let to_boundary = g.distance_to_boundary();
    let band_excess = (0..g.len())
        .filter(|&x| to_boundary[x] <= inst.band)
        .map(|x| (x, u[x] - v[x]))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    let band_ok = band_excess.is_none_or(|(_, d)| d <= inst.tol);
    hypotheses.push(Hypothesis {
        name: "boundary-band".into(),
        pass: band_ok,
        detail: match band_excess {
            Some((x, d)) => format!("max u - v = {d} at {:?} within distance {}", g.id(x), inst.band),
            None => "empty band".into(),
        },
    });

    let (worst, max_difference) = (0..g.len())
        .map(|x| (x, u[x] - v[x]))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("graphs are nonempty");
    let violation = (max_difference > inst.tol).then(|| (g.id(worst).to_string(), max_difference));
    let first_failed = hypotheses.iter().find(|h| !h.pass).map(|h| h.name.clone());
    let verdict = match (&first_failed, &violation) {
        (Some(_), _) => ComparisonVerdict::HypothesisFailed,
        (None, None) => ComparisonVerdict::Pass,
        (None, Some(_)) => ComparisonVerdict::Violation,
    };
    Ok(ComparisonReport {
        hypotheses,
        first_failed,
        max_difference,
        violation,
        verdict,
    })
}

fn monge_hypothesis(name: &str, report: &CheckReport) -> Hypothesis {
    Hypothesis {
        name: name.into(),
        pass: report.pass,
        detail: match &report.worst {
            Some(w) => format!("worst residual {} at {:?} (tol {})", w.residual, w.id, report.tolerance),
            None => "no interior vertices".into(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRow {
    pub fixture: String,
    pub level: usize,
    pub check: String,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
    /// Max Monge residual per refinement level.
    pub monge_residuals: Vec<f64>,
    pub monge_nonincreasing: bool,
    pub pass: bool,
}

/// Solves on the fixture at `levels` refinement levels (`h`, `h/2`, ...)
/// and runs the four solution-notion checks on each solution. `f` and `ζ`
/// live on the base graph and are carried to refinements by linear
/// interpolation.
pub fn equivalence_suite(fix: &Fixture, f: &ScalarField, zeta: &ScalarField, levels: usize) -> Result<SuiteReport> {
    let base = &fix.graph;
    let h0 = base.max_edge_length();
    let mut rows = Vec::new();
    let mut monge_residuals = Vec::with_capacity(levels);
    for level in 0..levels.max(1) {
        let (g, f_l, z_l) = if level == 0 {
            (base.clone(), f.clone(), zeta.clone())
        } else {
            let r = refine_mapped(base, h0 / (1u64 << level) as f64);
            let f_l = f.interpolate(&r.origin);
            let z_l = zeta.interpolate(&r.origin);
            (r.graph, f_l, z_l)
        };
        let vf = solve_dirichlet(&DirichletProblem::new(&g, &f_l, &z_l))?;
        let tol = lipschitz_constant(&g, &f_l)? * g.max_edge_length() + BASE_TOL;
        let reports = [
            check_c_subsolution(&g, &vf.u, &f_l, 0.0)?,
            check_c_supersolution(&g, &vf.u, &f_l, tol)?,
            check_monge(&g, &vf.u, &f_l, tol, MongeMode::Solution)?,
            check_regularity(&g, &vf.u, tol)?,
        ];
        monge_residuals.push(reports[2].max_residual());
        rows.extend(reports.iter().map(|r| SuiteRow {
            fixture: fix.name.clone(),
            level,
            check: r.check.clone(),
            max_residual: r.max_residual(),
            tol: r.tolerance,
            pass: r.pass,
        }));
    }
    let monge_nonincreasing = monge_residuals.windows(2).all(|w| w[1] <= w[0] + ABS_TOL);
    let pass = monge_nonincreasing && rows.iter().all(|r| r.pass);
    Ok(SuiteReport {
        rows,
        monge_residuals,
        monge_nonincreasing,
        pass,
    })
}

/// One counterexample: a Hamiltonian, a candidate `u` on the interval and
/// the residual the named check must produce at vertex `"0"`.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleCase {
    pub name: String,
    pub hamiltonian: String,
    pub check: String,
    pub expected_residual: f64,
    pub observed_residual: f64,
    /// Verdict of [`validate_hamiltonian`] on the case's Hamiltonian.
    pub hamiltonian_valid: bool,
    /// Extra expectation specific to the case (see [`counterexample_suite`]).
    pub extra: Option<(String, bool)>,
    pub pass: bool,
    #[serde(skip)]
    pub u: ScalarField,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleSuite {
    #[serde(skip)]
    pub graph: MetricGraph,
    pub cases: Vec<CounterexampleCase>,
    pub pass: bool,
}

/// Non-monotone and plateau Hamiltonians on `interval(n)`, `n` even:
///
/// - `u = −3|x|` with ex1: every interior sub-slope is 3 and `H(3) = 0`, so
///   the Monge residual is 0, yet `u` violates the curve inequality for
///   `f ≡ 1` on every edge.
/// - `u = |x|` with ex2: sub-slope 0 at the origin, residual `|H(0)| = 1`.
/// - `u = x` for `x ≤ 0`, `2x` beyond, the plateau solution: slope 2 and
///   sub-slope 1 at the origin, regularity residual 1.
pub fn counterexample_suite(n: usize) -> Result<CounterexampleSuite> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::Validation(format!("counterexample interval needs even n >= 4, got {n}")));
    }
    let g = build_graph(&interval_spec(n))?;
    let origin = g.vertex("0")?;
    let x = |v: usize| g.coords(v).map_or(0.0, |c| c[0]);
    let field = |phi: &dyn Fn(f64) -> f64| ScalarField::from_fn(&g, FieldRole::Solution, |v| phi(x(v)));
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    let range = (-3.0, 3.0);
    let mut cases = Vec::new();

    let h1 = HamiltonianSpec::ex1();
    let u1 = field(&|t| -3.0 * t.abs());
    let monge = check_monge_hamiltonian(&g, &u1, &h1, BASE_TOL)?;
    let ones = ScalarField::constant(&g, FieldRole::Rhs, 1.0);
    let csub = check_c_subsolution(&g, &u1, &ones, 0.0)?;
    let observed = monge.max_residual();
    cases.push(CounterexampleCase {
        name: "monge-but-not-viscosity".into(),
        hamiltonian: h1.name.clone(),
        check: monge.check.clone(),
        expected_residual: 0.0,
        observed_residual: observed,
        hamiltonian_valid: validate_hamiltonian(&h1, &g, range, 4)?.pass,
        extra: Some(("csub fails for f = 1".into(), !csub.pass)),
        pass: close(observed, 0.0) && monge.pass && !csub.pass,
        u: u1,
    });

    let h2 = HamiltonianSpec::ex2();
    let u2 = field(&|t| t.abs());
    let monge = check_monge_hamiltonian(&g, &u2, &h2, BASE_TOL)?;
    let observed = monge.item("0").map_or(f64::NAN, |i| i.residual);
    cases.push(CounterexampleCase {
        name: "viscosity-but-not-monge".into(),
        hamiltonian: h2.name.clone(),
        check: monge.check.clone(),
        expected_residual: 1.0,
        observed_residual: observed,
        hamiltonian_valid: validate_hamiltonian(&h2, &g, range, 4)?.pass,
        extra: None,
        pass: close(observed, 1.0) && monge.worst.as_ref().map(|w| w.id.as_str()) == Some("0"),
        u: u2,
    });

    let h3 = HamiltonianSpec::plateau();
    let u3 = field(&|t| if t <= 0.0 { t } else { 2.0 * t });
    let reg = check_regularity(&g, &u3, BASE_TOL)?;
    let observed = reg.item("0").map_or(f64::NAN, |i| i.residual);
    let sub = slopes(&g, &u3, origin)?.sub_slope;
    cases.push(CounterexampleCase {
        name: "plateau-irregular".into(),
        hamiltonian: h3.name.clone(),
        check: reg.check.clone(),
        expected_residual: 1.0,
        observed_residual: observed,
        hamiltonian_valid: validate_hamiltonian(&h3, &g, range, 4)?.pass,
        extra: Some(("sub-slope 1 at the origin".into(), close(sub, 1.0))),
        pass: close(observed, 1.0) && reg.failures().count() == 1 && close(sub, 1.0),
        u: u3,
    });

    let pass = cases.iter().all(|c| c.pass && !c.hamiltonian_valid);
    Ok(CounterexampleSuite { graph: g, cases, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counterexamples_reproduce() {
        let suite = counterexample_suite(200).unwrap();
        for c in &suite.cases {
            assert!(c.pass, "{c:?}");
            assert!(!c.hamiltonian_valid, "{}", c.hamiltonian);
        }
        assert!(suite.pass);
    }

    #[test]
    fn fixture_names_parse() {
        assert_eq!("grid(32)".parse::<FixtureKind>().unwrap(), FixtureKind::Grid { n: 32, connectivity: 4 });
        assert_eq!("gasket(4)".parse::<FixtureKind>().unwrap(), FixtureKind::Gasket { level: 4 });
        assert!("gasket".parse::<FixtureKind>().is_err());
        assert!("torus(3)".parse::<FixtureKind>().is_err());
    }

    #[test]
    fn gasket_counts() {
        for level in 0..=5u32 {
            let g = fixture(FixtureKind::Gasket { level }).unwrap().graph;
            let e = 3usize.pow(level + 1);
            assert_eq!(g.edge_count(), e, "level {level}");
            assert_eq!(g.len(), (e + 3) / 2, "level {level}");
            assert_eq!(g.boundary_count(), 3);
        }
    }

    #[test]
    fn interval_ids_are_centered() {
        let g = fixture(FixtureKind::Interval { n: 4 }).unwrap().graph;
        let ids: Vec<&str> = g.ids().iter().map(String::as_str).collect();
        assert_eq!(ids, ["-2", "-1", "0", "1", "2"]);
        assert_eq!(g.boundary().map(|v| g.id(v)).collect::<Vec<_>>(), ["-2", "2"]);
    }

    #[test]
    fn tree_layout() {
        let g = fixture(FixtureKind::BinaryTree { depth: 3 }).unwrap().graph;
        assert_eq!(g.len(), 15);
        assert_eq!(g.edge_count(), 14);
        assert_eq!(g.boundary_count(), 8);
    }

    #[test]
    fn bad_sizes_are_rejected() {
        assert!(fixture(FixtureKind::Interval { n: 0 }).is_err());
        assert!(fixture(FixtureKind::Grid { n: 4, connectivity: 6 }).is_err());
        assert!(fixture(FixtureKind::Circle { n: 2 }).is_err());
    }
}
