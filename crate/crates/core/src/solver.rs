//! Dirichlet problem for the eikonal equation through the optimal-control
//! value formula
//!
//! ```text
//! u(x) = inf over curves from x of  ∫ f ds + ζ(exit point)
//! ```
//!
//! On a graph the infimum runs over vertex paths, so a single multi-source
//! label-setting pass with the boundary data as initial labels computes it
//! exactly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{edge_costs, validate_field, FieldRole, ScalarField};
use crate::metric::{Curve, MetricGraph, ABS_TOL, REL_TOL};

#[derive(Debug, Clone, Copy)]
pub struct DirichletProblem<'a> {
    pub graph: &'a MetricGraph,
    pub f: &'a ScalarField,
    pub zeta: &'a ScalarField,
    pub threshold: f64,
}

impl<'a> DirichletProblem<'a> {
    pub fn new(graph: &'a MetricGraph, f: &'a ScalarField, zeta: &'a ScalarField) -> Self {
        DirichletProblem {
            graph,
            f,
            zeta,
            threshold: crate::fields::DEFAULT_POSITIVITY_THRESHOLD,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.graph;
        if g.boundary_count() == 0 {
            return Err(Error::Problem("boundary set is empty".into()));
        }
        if self.f.role() != FieldRole::Rhs {
            return Err(Error::Field(format!("expected rhs_f, got {}", self.f.role())));
        }
        if self.zeta.role() != FieldRole::BoundaryData {
            return Err(Error::Field(format!(
                "expected boundary_zeta, got {}",
                self.zeta.role()
            )));
        }
        self.f.check_domain(g)?;
        self.zeta.check_domain(g)?;
        let report = validate_field(g, self.f, self.threshold);
        if !report.pass {
            let (id, x) = report.below.first().cloned().unwrap_or_default();
            return Err(Error::Field(format!(
                "f falls below the positivity threshold {} at {} vertices (first {id:?}: {x})",
                self.threshold,
                report.below.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    pub u: ScalarField,
    /// Optimal exit vertex for every vertex.
    pub exit: Vec<usize>,
    /// At boundary vertices: whether `u(y) = ζ(y)`.
    pub attained: Vec<Option<bool>>,
    /// Next vertex on an optimal path (`usize::MAX` at a vertex that exits
    /// through its own boundary value).
    pub next: Vec<usize>,
}

impl ValueFunction {
    pub fn values(&self) -> Vec<f64> {
        self.u.raw().iter().map(|x| x.unwrap_or(f64::NAN)).collect()
    }

    pub fn value(&self, v: usize) -> f64 {
        self.u.get(v).unwrap_or(f64::NAN)
    }

    /// Optimal path from `x` to its exit vertex.
    pub fn optimal_path(&self, g: &MetricGraph, x: usize) -> Curve {
        let mut path = vec![x];
        let mut v = x;
        while self.next[v] != usize::MAX {
            v = self.next[v];
            path.push(v);
        }
        Curve::new(g, path).expect("optimal path follows edges")
    }
}

pub fn solve_dirichlet(p: &DirichletProblem<'_>) -> Result<ValueFunction> {
    p.validate()?;
    let g = p.graph;
    let costs = edge_costs(g, p.f)?;
    let sources: Vec<(usize, f64)> = g
        .boundary()
        .map(|y| (y, p.zeta.get(y).expect("checked domain")))
        .collect();
    let sp = g.shortest_paths(&sources, |k| costs[k], f64::INFINITY);
    let attained = (0..g.len())
        .map(|v| g.is_boundary(v).then(|| sp.origin[v] == v))
        .collect();
    Ok(ValueFunction {
        u: ScalarField::new(FieldRole::Solution, sp.dist),
        exit: sp.origin,
        attained,
        next: sp.pred,
    })
}

fn leq(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + ABS_TOL + REL_TOL * rhs.abs()
}

/// A vertex pair with the ratio it realizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightPair {
    pub x: String,
    pub y: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryCertificate {
    /// Lipschitz constant of ζ on boundary pairs with respect to d̃.
    pub lipschitz: f64,
    pub lipschitz_pair: Option<TightPair>,
    pub inf_f: f64,
    pub sup_f: f64,
    /// `|ζ(x) − ζ(y)| ≤ d̃(x, y) inf f` on boundary pairs, i.e. `L ≤ inf f`.
    pub strong_condition: bool,
    /// `ζ(x) − ζ(y) ≤ ∫ f ds` along every path between boundary vertices.
    pub curve_condition: bool,
    /// Pair with the largest `ζ(x) − ζ(y) − cost(x, y)`, when that is positive.
    pub curve_violation: Option<TightPair>,
    /// `max{L, sup f}`.
    pub weak_bound: f64,
    /// Largest `(u(x) − ζ(y)) / d̃(x, y)` over interior/boundary pairs.
    pub realized_weak_ratio: f64,
    pub weak_tight_pair: Option<TightPair>,
    pub weak_bound_holds: bool,
    /// `|u(x) − ζ(y)| ≤ d̃(x, y) sup f`, evaluated only when the strong
    /// condition holds.
    pub two_sided_holds: Option<bool>,
    pub two_sided_tight_pair: Option<TightPair>,
}

pub fn check_boundary_consistency(p: &DirichletProblem<'_>, vf: &ValueFunction) -> Result<BoundaryCertificate> {
    p.validate()?;
    let g = p.graph;
    let f = p.f.dense(g)?;
    let costs = edge_costs(g, p.f)?;
    let u = vf.u.dense(g)?;
    let zeta = |y: usize| p.zeta.get(y).expect("checked domain");
    let inf_f = f.iter().copied().fold(f64::INFINITY, f64::min);
    let sup_f = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let boundary: Vec<usize> = g.boundary().collect();

    let mut lipschitz = 0.0;
    let mut lipschitz_pair = None;
    let mut curve_gap = 0.0;
    let mut curve_violation = None;
    let mut realized = f64::NEG_INFINITY;
    let mut weak_pair = None;
    let mut two_sided_ratio = f64::NEG_INFINITY;
    let mut two_sided_pair = None;
    let mut dist_from = Vec::with_capacity(boundary.len());

    for &y in &boundary {
        let dist = g.distances_from(y);
        let cost = g.shortest_paths(&[(y, 0.0)], |k| costs[k], f64::INFINITY).dist;
        for &x in &boundary {
            if x == y {
                continue;
            }
            let ratio = (zeta(x) - zeta(y)).abs() / dist[x];
            if ratio > lipschitz {
                lipschitz = ratio;
                lipschitz_pair = Some(TightPair {
                    x: g.id(x).into(),
                    y: g.id(y).into(),
                    ratio,
                });
            }
            let gap = zeta(x) - zeta(y) - cost[x];
            if gap > curve_gap && !leq(zeta(x) - zeta(y), cost[x]) {
                curve_gap = gap;
                curve_violation = Some(TightPair {
                    x: g.id(x).into(),
                    y: g.id(y).into(),
                    ratio: gap,
                });
            }
        }
        for x in g.interior() {
            let ratio = (u[x] - zeta(y)) / dist[x];
            if ratio > realized {
                realized = ratio;
                weak_pair = Some(TightPair {
                    x: g.id(x).into(),
                    y: g.id(y).into(),
                    ratio,
                });
            }
            let abs_ratio = (u[x] - zeta(y)).abs() / dist[x];
            if abs_ratio > two_sided_ratio {
                two_sided_ratio = abs_ratio;
                two_sided_pair = Some(TightPair {
                    x: g.id(x).into(),
                    y: g.id(y).into(),
                    ratio: abs_ratio,
                });
            }
        }
        dist_from.push(dist);
    }

    let weak_bound = lipschitz.max(sup_f);
    let strong_condition = leq(lipschitz, inf_f);
    let mut weak_bound_holds = true;
    let mut two_sided_holds = strong_condition.then_some(true);
    for (j, &y) in boundary.iter().enumerate() {
        for x in g.interior() {
            let d = dist_from[j][x];
            if !leq(u[x] - zeta(y), d * weak_bound) {
                weak_bound_holds = false;
            }
            if strong_condition && !leq((u[x] - zeta(y)).abs(), d * sup_f) {
                two_sided_holds = Some(false);
            }
        }
    }

    Ok(BoundaryCertificate {
        lipschitz,
        lipschitz_pair,
        inf_f,
        sup_f,
        strong_condition,
        curve_condition: curve_violation.is_none(),
        curve_violation,
        weak_bound,
        realized_weak_ratio: if realized.is_finite() { realized } else { 0.0 },
        weak_tight_pair: weak_pair,
        weak_bound_holds,
        two_sided_holds,
        two_sided_tight_pair: if strong_condition { two_sided_pair } else { None },
    })
}

/// Empirical modulus of quasiconvexity of a vertex subset: how much longer
/// paths confined to the subset are than unconstrained shortest paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiconvexityEstimate {
    /// Step function `(t, σ)`: over pairs with `d̃ ≤ t`, the longest
    /// in-subset connecting path is `σ`. Both coordinates nondecreasing.
    pub steps: Vec<(f64, f64)>,
    pub max_ratio: f64,
    pub worst_pair: Option<TightPair>,
    /// Always true: the modulus is fitted to finitely many pairs.
    pub heuristic: bool,
}

impl QuasiconvexityEstimate {
    /// `σ(t)`; 0 below the smallest sampled distance.
    pub fn sigma(&self, t: f64) -> f64 {
        self.steps
            .iter()
            .take_while(|s| s.0 <= t)
            .last()
            .map(|s| s.1)
            .unwrap_or(0.0)
    }
}

pub fn quasiconvexity_probe(g: &MetricGraph, subset: &[usize]) -> Result<QuasiconvexityEstimate> {
    let mut inside = vec![false; g.len()];
    for &v in subset {
        inside[v] = true;
    }
    let members: Vec<usize> = (0..g.len()).filter(|&v| inside[v]).collect();
    let confined = |k: usize| {
        let e = g.edge(k);
        if inside[e.a] && inside[e.b] {
            e.length
        } else {
            f64::INFINITY
        }
    };

    let mut pairs = Vec::new();
    for (i, &x) in members.iter().enumerate() {
        let free = g.distances_from(x);
        let within = g.shortest_paths(&[(x, 0.0)], confined, f64::INFINITY).dist;
        for &y in &members[i + 1..] {
            if !within[y].is_finite() {
                return Err(Error::Connectivity(format!(
                    "subset vertices {:?} and {:?} are not connected inside the subset",
                    g.id(x),
                    g.id(y)
                )));
            }
            pairs.push((free[y], within[y], x, y));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));

    let mut steps: Vec<(f64, f64)> = Vec::new();
    let mut running = 0.0f64;
    let mut max_ratio = if pairs.is_empty() { 1.0 } else { 0.0 };
    let mut worst_pair = None;
    for &(free, within, x, y) in &pairs {
        let ratio = within / free;
        if ratio > max_ratio {
            max_ratio = ratio;
            worst_pair = Some(TightPair {
                x: g.id(x).into(),
                y: g.id(y).into(),
                ratio,
            });
        }
        if within > running {
            running = within;
            match steps.last_mut() {
                Some(last) if last.0 == free => last.1 = running,
                _ => steps.push((free, running)),
            }
        }
    }
    Ok(QuasiconvexityEstimate {
        steps,
        max_ratio,
        worst_pair,
        heuristic: true,
    })
}
