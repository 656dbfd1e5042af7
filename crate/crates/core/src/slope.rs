//! One-hop slopes and the discrete checks for each solution notion.
//!
//! The limsup defining a slope at `x` becomes a max over the neighbors of
//! `x`, with the incident edge length as the intrinsic distance. Finer
//! resolution comes from [`crate::metric::refine`].

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{edge_costs, lipschitz_constant, ScalarField};
use crate::metric::{ball, Curve, MetricGraph};

/// Slack added to every interpolation-based default tolerance.
pub const BASE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeTriple {
    pub vertex: usize,
    pub slope: f64,
    pub super_slope: f64,
    pub sub_slope: f64,
}

pub fn slopes(g: &MetricGraph, u: &ScalarField, x: usize) -> Result<SlopeTriple> {
    let vals = u.dense(g)?;
    slopes_of(g, &vals, x)
}

pub(crate) fn slopes_of(g: &MetricGraph, u: &[f64], x: usize) -> Result<SlopeTriple> {
    if g.degree(x) == 0 {
        return Err(Error::Graph(format!("vertex {:?} has no neighbors", g.id(x))));
    }
    let mut up = 0.0f64;
    let mut down = 0.0f64;
    for &(y, k) in g.neighbors(x) {
        let len = g.edge(k).length;
        let diff = u[y] - u[x];
        up = up.max(diff.max(0.0) / len);
        down = down.max((-diff).max(0.0) / len);
    }
    Ok(SlopeTriple {
        vertex: x,
        slope: up.max(down),
        super_slope: up,
        sub_slope: down,
    })
}

/// `Lip(f) · h_max + 1e-9`: the interpolation allowance used as the default
/// tolerance for Monge, regularity and supersolution checks.
pub fn default_tolerance(g: &MetricGraph, f: &ScalarField) -> Result<f64> {
    Ok(lipschitz_constant(g, f)? * g.max_edge_length() + BASE_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported but not counted towards the overall verdict.
    Excluded,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Excluded => "excluded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckItem {
    pub id: String,
    pub residual: f64,
    pub verdict: Verdict,
}

/// Local Lipschitz bound of c-subsolutions, sampled on balls:
/// `|u(x) − u(y)| ≤ d̃(x, y) · sup_{B_2r(x0)} f` for `x, y ∈ B_r(x0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzCertificate {
    pub radius: f64,
    pub centers: usize,
    pub pairs: usize,
    /// Largest `|u(x) − u(y)| − d̃(x, y) · sup f` seen.
    pub max_excess: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub tolerance: f64,
    pub items: Vec<CheckItem>,
    pub pass: bool,
    pub worst: Option<CheckItem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<LipschitzCertificate>,
    /// Vertex ids of a discrete ε-optimal descent curve.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub descent: Option<Vec<String>>,
}

impl CheckReport {
    /// Builds a report from `(id, residual, excluded)` triples.
    pub fn from_residuals<I>(check: &str, tolerance: f64, residuals: I) -> CheckReport
    where
        I: IntoIterator<Item = (String, f64, bool)>,
    {
        let items: Vec<CheckItem> = residuals
            .into_iter()
            .map(|(id, residual, excluded)| {
                let verdict = if excluded {
                    Verdict::Excluded
                } else if residual <= tolerance {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                };
                CheckItem { id, residual, verdict }
            })
            .collect();
        let worst = items
            .iter()
            .filter(|i| i.verdict != Verdict::Excluded)
            .max_by(|a, b| a.residual.total_cmp(&b.residual))
            .cloned();
        let pass = items.iter().all(|i| i.verdict != Verdict::Fail);
        CheckReport {
            check: check.to_string(),
            tolerance,
            items,
            pass,
            worst,
            lipschitz: None,
            descent: None,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.worst.as_ref().map(|w| w.residual).unwrap_or(0.0)
    }

    pub fn item(&self, id: &str) -> Option<&CheckItem> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckItem> {
        self.items.iter().filter(|i| i.verdict == Verdict::Fail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MongeMode {
    /// `|∇⁻u| = f`
    Solution,
    /// `|∇⁻u| ≤ f`
    Sub,
    /// `|∇⁻u| ≥ f`
    Super,
}

impl std::str::FromStr for MongeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" | "solution" => Ok(MongeMode::Solution),
            "sub" => Ok(MongeMode::Sub),
            "super" => Ok(MongeMode::Super),
            _ => Err(Error::Parse(format!("unknown monge mode {s:?}"))),
        }
    }
}

/// Monge check at interior vertices: residual `|sub_slope − f|`, or the
/// one-sided part in sub/super mode.
pub fn check_monge(g: &MetricGraph, u: &ScalarField, f: &ScalarField, tol: f64, mode: MongeMode) -> Result<CheckReport> {
    let u = u.dense(g)?;
    let f = f.dense(g)?;
    let residuals = g
        .interior()
        .map(|x| {
            let s = slopes_of(g, &u, x)?.sub_slope;
            let r = match mode {
                MongeMode::Solution => (s - f[x]).abs(),
                MongeMode::Sub => (s - f[x]).max(0.0),
                MongeMode::Super => (f[x] - s).max(0.0),
            };
            Ok((g.id(x).to_string(), r, false))
        })
        .collect::<Result<Vec<_>>>()?;
    let name = match mode {
        MongeMode::Solution => "monge",
        MongeMode::Sub => "monge-sub",
        MongeMode::Super => "monge-super",
    };
    Ok(CheckReport::from_residuals(name, tol, residuals))
}

/// Curve characterization of c-subsolutions, edge by edge in both
/// orientations: residual `[u(x) − u(y) − ∫_xy f]₊`.
pub fn check_c_subsolution(g: &MetricGraph, u: &ScalarField, f: &ScalarField, tol: f64) -> Result<CheckReport> {
    let vals = u.dense(g)?;
    let costs = edge_costs(g, f)?;
    let mut residuals = Vec::with_capacity(2 * g.edge_count());
    for (k, e) in g.edges().iter().enumerate() {
        for (x, y) in [(e.a, e.b), (e.b, e.a)] {
            let r = (vals[x] - (vals[y] + costs[k])).max(0.0);
            residuals.push((format!("{}->{}", g.id(x), g.id(y)), r, false));
        }
    }
    let mut report = CheckReport::from_residuals("csub", tol, residuals);
    report.lipschitz = Some(ball_lipschitz(g, &vals, &f.dense(g)?, tol));
    Ok(report)
}

const LIPSCHITZ_CENTERS: usize = 16;

fn ball_lipschitz(g: &MetricGraph, u: &[f64], f: &[f64], tol: f64) -> LipschitzCertificate {
    let radius = 2.0 * g.max_edge_length();
    let interior: Vec<usize> = g.interior().collect();
    let stride = interior.len().div_ceil(LIPSCHITZ_CENTERS).max(1);
    let mut centers = 0;
    let mut pairs = 0;
    let mut max_excess = f64::NEG_INFINITY;
    for &x0 in interior.iter().step_by(stride) {
        centers += 1;
        let outer = ball(g, x0, 2.0 * radius);
        let sup_f = outer
            .members
            .iter()
            .map(|&(v, _)| f[v])
            .fold(f64::NEG_INFINITY, f64::max);
        let inner = ball(g, x0, radius);
        for &(x, _) in &inner.members {
            let dist = g.distances_from(x);
            for &(y, _) in &inner.members {
                if y <= x {
                    continue;
                }
                pairs += 1;
                max_excess = max_excess.max((u[x] - u[y]).abs() - dist[y] * sup_f);
            }
        }
    }
    if pairs == 0 {
        max_excess = 0.0;
    }
    LipschitzCertificate {
        radius,
        centers,
        pairs,
        max_excess,
        pass: max_excess <= tol + crate::metric::ABS_TOL,
    }
}

/// Greedy descent from `x`: repeatedly step to the neighbor minimizing
/// `∫ f + u(y)` until a boundary vertex is reached or `u` stops decreasing.
pub fn descent_curve(g: &MetricGraph, u: &ScalarField, f: &ScalarField, x: usize) -> Result<Curve> {
    let vals = u.dense(g)?;
    let costs = edge_costs(g, f)?;
    let mut path = vec![x];
    let mut v = x;
    while !g.is_boundary(v) && path.len() <= g.len() {
        let best = g
            .neighbors(v)
            .iter()
            .min_by(|p, q| (costs[p.1] + vals[p.0]).total_cmp(&(costs[q.1] + vals[q.0])));
        match best {
            Some(&(w, _)) if vals[w] < vals[v] => {
                path.push(w);
                v = w;
            }
            _ => break,
        }
    }
    Curve::new(g, path)
}

/// Local c-supersolution check with one-hop radius: at each interior `x` some
/// neighbor must satisfy `u(x) ≥ ∫_xy f + u(y) − eps`. The residual is
/// `[min_y(∫_xy f + u(y)) − u(x)]₊`, compared against `eps`.
pub fn check_c_supersolution(g: &MetricGraph, u: &ScalarField, f: &ScalarField, eps: f64) -> Result<CheckReport> {
    let vals = u.dense(g)?;
    let costs = edge_costs(g, f)?;
    let residuals = g
        .interior()
        .map(|x| {
            if g.degree(x) == 0 {
                return Err(Error::Graph(format!("vertex {:?} has no neighbors", g.id(x))));
            }
            let best = g
                .neighbors(x)
                .iter()
                .map(|&(y, k)| costs[k] + vals[y])
                .fold(f64::INFINITY, f64::min);
            Ok((g.id(x).to_string(), (best - vals[x]).max(0.0), false))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = CheckReport::from_residuals("csuper", eps, residuals);
    let top = g
        .interior()
        .max_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(b.cmp(&a)));
    if let Some(x) = top {
        let curve = descent_curve(g, u, f, x)?;
        report.descent = Some(curve.vertices().iter().map(|&v| g.id(v).to_string()).collect());
    }
    Ok(report)
}

/// Regularity `|∇u| = |∇⁻u|` at interior vertices; residual `slope − sub_slope`.
/// Boundary-adjacent vertices are reported as excluded.
pub fn check_regularity(g: &MetricGraph, u: &ScalarField, tol: f64) -> Result<CheckReport> {
    let vals = u.dense(g)?;
    let residuals = g
        .interior()
        .map(|x| {
            let s = slopes_of(g, &vals, x)?;
            Ok((g.id(x).to_string(), s.slope - s.sub_slope, g.is_boundary_adjacent(x)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::from_residuals("regularity", tol, residuals))
}
