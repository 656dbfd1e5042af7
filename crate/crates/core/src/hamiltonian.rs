//! Monotone coercive Hamiltonians `H(x, ρ, p)` and their reduction to the
//! eikonal equation.
//!
//! With `p ↦ H(x, ρ, p)` strictly increasing and coercive, `H(x, u, p) = 0`
//! has the unique root `h(x) = inf{p ≥ 0 : H(x, u(x), p) > 0}`, and `u`
//! solves `H(x, u, |∇u|) = 0` in the Monge sense exactly when it solves
//! `|∇u| = h`. For `ρ`-dependent `H` the root depends on `u`, which
//! [`solve_general`] resolves by fixed-point iteration.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{FieldRole, ScalarField};
use crate::metric::MetricGraph;
use crate::slope::{check_monge, default_tolerance, slopes_of, CheckReport, MongeMode};
use crate::solver::{solve_dirichlet, DirichletProblem, ValueFunction};

/// Vertex passed to a Hamiltonian evaluator.
#[derive(Debug, Clone, Copy)]
pub struct Point<'a> {
    pub index: usize,
    pub coords: Option<&'a [f64]>,
}

impl<'a> Point<'a> {
    pub fn of(g: &'a MetricGraph, v: usize) -> Point<'a> {
        Point {
            index: v,
            coords: g.coords(v),
        }
    }

    pub fn bare(index: usize) -> Point<'static> {
        Point { index, coords: None }
    }
}

pub type Evaluator = dyn Fn(&Point<'_>, f64, f64) -> f64 + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RhoMonotonicity {
    Independent,
    Nondecreasing,
    StrictlyIncreasing,
}

/// Largest p for which coercivity is probed.
pub const DEFAULT_P_MAX: f64 = (1u64 << 20) as f64;
/// Cap for the doubling bracket in [`reduce_h`].
pub const BRACKET_CAP: f64 = (1u64 << 40) as f64;
pub const DEFAULT_PICARD_TOL: f64 = 1e-8;
pub const DEFAULT_PICARD_MAX_ITER: usize = 100;

#[derive(Clone)]
pub struct HamiltonianSpec {
    pub name: String,
    evaluator: Arc<Evaluator>,
    /// Margin in "p ↦ H − λ₀ p is nondecreasing". Zero declares plain
    /// strict monotonicity in p instead.
    pub lambda0: f64,
    pub rho: RhoMonotonicity,
    pub p_max: f64,
}

impl fmt::Debug for HamiltonianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianSpec")
            .field("name", &self.name)
            .field("lambda0", &self.lambda0)
            .field("rho", &self.rho)
            .field("p_max", &self.p_max)
            .finish()
    }
}

impl HamiltonianSpec {
    pub fn new<F>(name: &str, lambda0: f64, rho: RhoMonotonicity, evaluator: F) -> Self
    where
        F: Fn(&Point<'_>, f64, f64) -> f64 + Send + Sync + 'static,
    {
        HamiltonianSpec {
            name: name.to_string(),
            evaluator: Arc::new(evaluator),
            lambda0,
            rho,
            p_max: DEFAULT_P_MAX,
        }
    }

    pub fn with_p_max(mut self, p_max: f64) -> Self {
        self.p_max = p_max;
        self
    }

    pub fn eval(&self, x: &Point<'_>, rho: f64, p: f64) -> f64 {
        (self.evaluator)(x, rho, p)
    }

    fn eval_checked(&self, x: &Point<'_>, rho: f64, p: f64) -> Result<f64> {
        let v = self.eval(x, rho, p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Hamiltonian(format!(
                "{} evaluates to {v} at vertex {}, rho {rho}, p {p}",
                self.name, x.index
            )))
        }
    }

    /// `H(p) = p − c`.
    pub fn linear(c: f64) -> Self {
        Self::new(&format!("linear:{c}"), 1.0, RhoMonotonicity::Independent, move |_, _, p| p - c)
    }

    /// `H(p) = p² − c²`. Strictly increasing but with no uniform margin at
    /// `p = 0`, so it is declared with `λ₀ = 0`.
    pub fn quadratic(c: f64) -> Self {
        Self::new(&format!("quadratic:{c}"), 0.0, RhoMonotonicity::Independent, move |_, _, p| {
            p * p - c * c
        })
    }

    /// `H(ρ, p) = p + ρ − c`.
    pub fn affine_rho(c: f64) -> Self {
        Self::new(&format!("affine-rho:{c}"), 1.0, RhoMonotonicity::StrictlyIncreasing, move |_, rho, p| {
            p + rho - c
        })
    }

    /// `H(p) = 1 − |p − 2| + max{p − 3, 0}²`: coercive, not monotone.
    pub fn ex1() -> Self {
        Self::new("ex1", 0.0, RhoMonotonicity::Independent, |_, _, p| {
            1.0 - (p - 2.0).abs() + (p - 3.0).max(0.0).powi(2)
        })
    }

    /// `H(p) = 1 − |p| + max{p − 3, 0}²`: coercive, not monotone.
    pub fn ex2() -> Self {
        Self::new("ex2", 0.0, RhoMonotonicity::Independent, |_, _, p| {
            1.0 - p.abs() + (p - 3.0).max(0.0).powi(2)
        })
    }

    /// Plateau Hamiltonian (`p` on `[0,1)`, `1` on `[1,2)`, `p − 1` beyond)
    /// shifted by −1, so that its zero set is the plateau `[1, 2]`.
    pub fn plateau() -> Self {
        Self::new("plateau", 0.0, RhoMonotonicity::Independent, |_, _, p| plateau_raw(p) - 1.0)
    }

    /// Builtin by name: `linear[:c]`, `quadratic[:c]`, `affine-rho[:c]`,
    /// `ex1`, `ex2`, `plateau`. `c` defaults to 1.
    pub fn builtin(name: &str) -> Result<Self> {
        let (base, arg) = match name.split_once(':') {
            Some((b, a)) => (b, Some(a)),
            None => (name, None),
        };
        let c = match arg {
            Some(a) => a
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad constant in {name:?}")))?,
            None => 1.0,
        };
        match (base, arg) {
            ("linear", _) => Ok(Self::linear(c)),
            ("quadratic", _) => Ok(Self::quadratic(c)),
            ("affine-rho", _) => Ok(Self::affine_rho(c)),
            ("ex1", None) => Ok(Self::ex1()),
            ("ex2", None) => Ok(Self::ex2()),
            ("plateau", None) => Ok(Self::plateau()),
            _ => Err(Error::Parse(format!("unknown builtin hamiltonian {name:?}"))),
        }
    }

    /// Expression in the variables `p`, `rho`, `x`, `y` (vertex coordinates,
    /// 0 when absent). Metadata must be declared since it cannot be inferred.
    pub fn expression(expr: &str, lambda0: f64, rho: RhoMonotonicity) -> Result<Self> {
        let tree = evalexpr::build_operator_tree(expr)
            .map_err(|e| Error::Parse(format!("hamiltonian expression {expr:?}: {e}")))?;
        let probe = Self::eval_tree(&tree, &Point::bare(0), 0.0, 0.0);
        if let Err(e) = probe {
            return Err(Error::Hamiltonian(format!("expression {expr:?}: {e}")));
        }
        Ok(Self::new(expr, lambda0, rho, move |x, r, p| {
            Self::eval_tree(&tree, x, r, p).unwrap_or(f64::NAN)
        }))
    }

    fn eval_tree(tree: &evalexpr::Node, x: &Point<'_>, rho: f64, p: f64) -> std::result::Result<f64, evalexpr::EvalexprError> {
        use evalexpr::{ContextWithMutableVariables, HashMapContext, Value};
        let mut ctx = HashMapContext::new();
        let coord = |i: usize| x.coords.and_then(|c| c.get(i).copied()).unwrap_or(0.0);
        ctx.set_value("p".into(), Value::Float(p))?;
        ctx.set_value("rho".into(), Value::Float(rho))?;
        ctx.set_value("x".into(), Value::Float(coord(0)))?;
        ctx.set_value("y".into(), Value::Float(coord(1)))?;
        tree.eval_number_with_context(&ctx)
    }
}

fn plateau_raw(p: f64) -> f64 {
    if p < 1.0 {
        p
    } else if p < 2.0 {
        1.0
    } else {
        p - 1.0
    }
}

impl FromStr for HamiltonianSpec {
    type Err = Error;

    /// Builtin name, or `expr:<expression>` for a strictly p-monotone,
    /// ρ-independent expression.
    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("expr:") {
            Some(e) => Self::expression(e, 0.0, RhoMonotonicity::Independent),
            None => Self::builtin(s),
        }
    }
}

/// One failing sample of [`validate_hamiltonian`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub condition: String,
    pub vertex: String,
    pub rho: f64,
    pub p: f64,
    pub detail: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} fails at vertex {:?}, rho = {}, p = {}: {}",
            self.condition, self.vertex, self.rho, self.p, self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamiltonianReport {
    pub name: String,
    pub monotone_in_p: bool,
    pub monotone_in_rho: bool,
    pub coercive: bool,
    /// `min H(x, ρ, P_max)` over the samples.
    pub coercivity_margin: f64,
    pub pass: bool,
    pub counterexample: Option<Counterexample>,
}

/// p-grid: step 1/64 on [0, 8], then doubling up to `p_max`.
fn p_grid(p_max: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=512).map(|k| k as f64 / 64.0).filter(|&p| p < p_max).collect();
    let mut p = 16.0;
    while p < p_max {
        grid.push(p);
        p *= 2.0;
    }
    grid.push(p_max);
    grid
}

fn even_samples(n: usize, count: usize) -> Vec<usize> {
    if count >= n {
        return (0..n).collect();
    }
    if count <= 1 {
        return vec![0];
    }
    (0..count).map(|i| i * (n - 1) / (count - 1)).collect()
}

/// Sampled validation of the structural conditions: monotonicity in `p`
/// with margin `λ₀` (strict monotonicity when `λ₀ = 0`), the declared
/// monotonicity in `ρ`, and coercivity probed at `P_max`.
pub fn validate_hamiltonian(
    h: &HamiltonianSpec,
    g: &MetricGraph,
    rho_range: (f64, f64),
    samples: usize,
) -> Result<HamiltonianReport> {
    if samples == 0 {
        return Err(Error::Validation("validate_hamiltonian needs samples >= 1".into()));
    }
    let vertices = even_samples(g.len(), samples);
    let rhos: Vec<f64> = if samples == 1 || rho_range.0 == rho_range.1 {
        vec![rho_range.0]
    } else {
        (0..samples)
            .map(|i| rho_range.0 + (rho_range.1 - rho_range.0) * i as f64 / (samples - 1) as f64)
            .collect()
    };
    let grid = p_grid(h.p_max);
    const TOL: f64 = 1e-12;

    let mut first: Option<Counterexample> = None;
    let mut monotone_in_p = true;
    let mut monotone_in_rho = true;
    let mut margin = f64::INFINITY;
    let note = |c: Counterexample, first: &mut Option<Counterexample>| {
        if first.is_none() {
            *first = Some(c);
        }
    };

    for &v in &vertices {
        let x = Point::of(g, v);
        for &rho in &rhos {
            let mut prev: Option<(f64, f64)> = None;
            for &p in &grid {
                let value = h.eval_checked(&x, rho, p)?;
                if let Some((pp, pv)) = prev {
                    let ok = if h.lambda0 > 0.0 {
                        // rounding in H and λ₀p grows with their magnitude
                        let slack = TOL * (1.0 + value.abs().max(h.lambda0 * p));
                        value - h.lambda0 * p >= pv - h.lambda0 * pp - slack
                    } else {
                        value > pv
                    };
                    if !ok && monotone_in_p {
                        monotone_in_p = false;
                        let what = if h.lambda0 > 0.0 {
                            format!("H - {}p decreases", h.lambda0)
                        } else {
                            "H is not strictly increasing".to_string()
                        };
                        note(
                            Counterexample {
                                condition: "monotonicity in p".into(),
                                vertex: g.id(v).into(),
                                rho,
                                p: pp,
                                detail: format!("{what}: H({pp}) = {pv}, H({p}) = {value}"),
                            },
                            &mut first,
                        );
                    }
                }
                prev = Some((p, value));
            }
            margin = margin.min(h.eval_checked(&x, rho, h.p_max)?);
        }

        for &p in grid.iter().take(64).step_by(8) {
            for pair in rhos.windows(2) {
                let lo = h.eval_checked(&x, pair[0], p)?;
                let hi = h.eval_checked(&x, pair[1], p)?;
                let ok = match h.rho {
                    RhoMonotonicity::Independent => (hi - lo).abs() <= TOL,
                    RhoMonotonicity::Nondecreasing => hi >= lo - TOL,
                    RhoMonotonicity::StrictlyIncreasing => hi > lo,
                };
                if !ok && monotone_in_rho {
                    monotone_in_rho = false;
                    note(
                        Counterexample {
                            condition: format!("declared rho-monotonicity {:?}", h.rho),
                            vertex: g.id(v).into(),
                            rho: pair[0],
                            p,
                            detail: format!("H(rho={}) = {lo}, H(rho={}) = {hi}", pair[0], pair[1]),
                        },
                        &mut first,
                    );
                }
            }
        }
    }

    let coercive = margin > 0.0;
    if !coercive {
        note(
            Counterexample {
                condition: "coercivity".into(),
                vertex: String::new(),
                rho: rho_range.0,
                p: h.p_max,
                detail: format!("min H at P_max = {margin}"),
            },
            &mut first,
        );
    }
    Ok(HamiltonianReport {
        name: h.name.clone(),
        monotone_in_p,
        monotone_in_rho,
        coercive,
        coercivity_margin: margin,
        pass: monotone_in_p && monotone_in_rho && coercive,
        counterexample: first,
    })
}

/// Root `h = inf{p ≥ 0 : H(x, ρ, p) > 0}` by doubling bracket and bisection.
/// Returns 0 when `H(x, ρ, 0) ≥ 0`.
pub fn reduce_h(h: &HamiltonianSpec, x: &Point<'_>, rho: f64, tol: f64) -> Result<f64> {
    reduce_with_residual(h, x, rho, tol).map(|r| r.0)
}

/// Root plus `|H(x, ρ, root)|`.
fn reduce_with_residual(h: &HamiltonianSpec, x: &Point<'_>, rho: f64, tol: f64) -> Result<(f64, f64)> {
    let at0 = h.eval_checked(x, rho, 0.0)?;
    if at0 >= 0.0 {
        return Ok((0.0, at0));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while h.eval_checked(x, rho, hi)? <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > BRACKET_CAP {
            return Err(Error::Coercivity {
                vertex: x.index.to_string(),
                rho,
                cap: BRACKET_CAP,
            });
        }
    }
    // invariant: H(lo) <= 0 < H(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h.eval_checked(x, rho, mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let residual = h.eval_checked(x, rho, hi)?.abs();
    if residual > tol {
        return Err(Error::Hamiltonian(format!(
            "{} jumps across zero near p = {hi} (|H| = {residual} > {tol})",
            h.name
        )));
    }
    Ok((hi, residual))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionField {
    #[serde(skip)]
    pub h: ScalarField,
    /// `|H(x, ρ(x), h(x))|` per vertex.
    pub residuals: Vec<f64>,
    /// Vertex ids with `H(x, ρ(x), 0) > tol`: no p ≥ 0 solves the equation.
    pub inconsistent: Vec<String>,
}

/// `h(x)` for every vertex at `ρ = rho(x)`.
pub fn reduce_field<R: Fn(usize) -> f64>(
    h: &HamiltonianSpec,
    g: &MetricGraph,
    rho: R,
    tol: f64,
) -> Result<ReductionField> {
    let mut values = Vec::with_capacity(g.len());
    let mut residuals = Vec::with_capacity(g.len());
    let mut inconsistent = Vec::new();
    for v in 0..g.len() {
        let (root, res) = reduce_with_residual(h, &Point::of(g, v), rho(v), tol)?;
        if root == 0.0 && res > tol {
            inconsistent.push(g.id(v).to_string());
        }
        values.push(root);
        residuals.push(res);
    }
    Ok(ReductionField {
        h: ScalarField::new(FieldRole::Rhs, values),
        residuals,
        inconsistent,
    })
}

#[derive(Debug, Clone)]
pub struct GeneralSolution {
    pub value: ValueFunction,
    /// Reduction evaluated at the returned `u`.
    pub reduction: ReductionField,
    /// Dirichlet solves performed, counting the initial one.
    pub iterations: usize,
    /// Max vertex change per Picard step.
    pub history: Vec<f64>,
    /// Monge check of `u` against `f = h`.
    pub monge: CheckReport,
}

#[derive(Debug, Clone, Copy)]
pub struct GeneralOptions {
    /// Bisection residual tolerance.
    pub bisection_tol: f64,
    /// Picard stopping tolerance on the max vertex change.
    pub tol: f64,
    pub max_iter: usize,
    /// Positivity threshold for the reduced right-hand side.
    pub threshold: f64,
}

impl Default for GeneralOptions {
    fn default() -> Self {
        GeneralOptions {
            bisection_tol: 1e-9,
            tol: DEFAULT_PICARD_TOL,
            max_iter: DEFAULT_PICARD_MAX_ITER,
            threshold: 0.0,
        }
    }
}

/// Solves `H(x, u, |∇u|) = 0`, `u = ζ` on the boundary, through the eikonal
/// reduction; Picard iteration on `u ↦ solve(f = h[u])` when `H` depends on `ρ`.
pub fn solve_general(
    g: &MetricGraph,
    h: &HamiltonianSpec,
    zeta: &ScalarField,
    opts: GeneralOptions,
) -> Result<GeneralSolution> {
    let solve_with = |f: &ScalarField| -> Result<ValueFunction> {
        solve_dirichlet(&DirichletProblem::new(g, f, zeta).with_threshold(opts.threshold))
    };

    let initial = reduce_field(h, g, |_| 0.0, opts.bisection_tol)?;
    let mut value = solve_with(&initial.h)?;
    let mut history = Vec::new();
    let mut iterations = 1;

    if h.rho != RhoMonotonicity::Independent {
        loop {
            let u = value.values();
            let red = reduce_field(h, g, |v| u[v], opts.bisection_tol)?;
            let next = solve_with(&red.h)?;
            let change = next
                .values()
                .iter()
                .zip(&u)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            history.push(change);
            value = next;
            iterations += 1;
            if change <= opts.tol {
                break;
            }
            if iterations >= opts.max_iter {
                return Err(Error::Convergence {
                    iterations,
                    last_change: change,
                    history,
                });
            }
        }
    }

    let u = value.values();
    let reduction = if h.rho == RhoMonotonicity::Independent {
        initial
    } else {
        reduce_field(h, g, |v| u[v], opts.bisection_tol)?
    };
    let tol = default_tolerance(g, &reduction.h)? + opts.tol;
    let monge = check_monge(g, &value.u, &reduction.h, tol, MongeMode::Solution)?;
    Ok(GeneralSolution {
        value,
        reduction,
        iterations,
        history,
        monge,
    })
}

/// Monge check for a general Hamiltonian: residual `|H(x, u(x), |∇⁻u|(x))|`
/// at interior vertices.
pub fn check_monge_hamiltonian(g: &MetricGraph, u: &ScalarField, h: &HamiltonianSpec, tol: f64) -> Result<CheckReport> {
    let vals = u.dense(g)?;
    let residuals = g
        .interior()
        .map(|x| {
            let s = slopes_of(g, &vals, x)?.sub_slope;
            let r = h.eval_checked(&Point::of(g, x), vals[x], s)?.abs();
            Ok((g.id(x).to_string(), r, false))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::from_residuals("monge-h", tol, residuals))
}
