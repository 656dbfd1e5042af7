//! Scalar fields on graph vertices, interpolated linearly along edges.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{MetricGraph, VertexOrigin};

/// Default positivity threshold for right-hand sides in Dirichlet solves.
pub const DEFAULT_POSITIVITY_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FieldRole {
    /// Right-hand side `f` of the eikonal equation.
    Rhs,
    /// Solution `u`.
    Solution,
    /// Dirichlet data, defined on boundary vertices only.
    BoundaryData,
}

impl fmt::Display for FieldRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldRole::Rhs => "rhs_f",
            FieldRole::Solution => "solution_u",
            FieldRole::BoundaryData => "boundary_zeta",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    role: FieldRole,
    values: Vec<Option<f64>>,
}

impl ScalarField {
    /// A field defined at every vertex.
    pub fn new(role: FieldRole, values: Vec<f64>) -> ScalarField {
        ScalarField {
            role,
            values: values.into_iter().map(Some).collect(),
        }
    }

    pub fn from_options(role: FieldRole, values: Vec<Option<f64>>) -> ScalarField {
        ScalarField { role, values }
    }

    pub fn constant(g: &MetricGraph, role: FieldRole, c: f64) -> ScalarField {
        ScalarField::new(role, vec![c; g.len()])
    }

    pub fn from_fn<F: FnMut(usize) -> f64>(g: &MetricGraph, role: FieldRole, f: F) -> ScalarField {
        ScalarField::new(role, (0..g.len()).map(f).collect())
    }

    /// Boundary data from `(vertex, value)` pairs.
    pub fn boundary_data<I>(g: &MetricGraph, values: I) -> ScalarField
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut out = vec![None; g.len()];
        for (v, z) in values {
            out[v] = Some(z);
        }
        ScalarField {
            role: FieldRole::BoundaryData,
            values: out,
        }
    }

    /// Boundary data equal to `c` on every boundary vertex.
    pub fn constant_boundary(g: &MetricGraph, c: f64) -> ScalarField {
        ScalarField::boundary_data(g, g.boundary().map(|v| (v, c)))
    }

    pub fn role(&self) -> FieldRole {
        self.role
    }

    pub fn with_role(mut self, role: FieldRole) -> ScalarField {
        self.role = role;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, v: usize) -> Option<f64> {
        self.values.get(v).copied().flatten()
    }

    pub fn value(&self, g: &MetricGraph, v: usize) -> Result<f64> {
        self.get(v)
            .ok_or_else(|| Error::Field(format!("{} has no value at {:?}", self.role, g.id(v))))
    }

    pub fn raw(&self) -> &[Option<f64>] {
        &self.values
    }

    /// Dense values; fails if any vertex lacks a value.
    pub fn dense(&self, g: &MetricGraph) -> Result<Vec<f64>> {
        self.check_len(g)?;
        (0..g.len()).map(|v| self.value(g, v)).collect()
    }

    pub fn check_len(&self, g: &MetricGraph) -> Result<()> {
        if self.values.len() != g.len() {
            return Err(Error::Field(format!(
                "{} has {} values for {} vertices",
                self.role,
                self.values.len(),
                g.len()
            )));
        }
        Ok(())
    }

    /// Checks the domain expected for the role: every vertex, or every
    /// boundary vertex for Dirichlet data.
    pub fn check_domain(&self, g: &MetricGraph) -> Result<()> {
        self.check_len(g)?;
        let missing = match self.role {
            FieldRole::BoundaryData => g.boundary().find(|&v| self.values[v].is_none()),
            _ => (0..g.len()).find(|&v| self.values[v].is_none()),
        };
        if let Some(v) = missing {
            return Err(Error::Field(format!("{} has no value at {:?}", self.role, g.id(v))));
        }
        if let Some(v) = (0..g.len()).find(|&v| matches!(self.values[v], Some(x) if !x.is_finite())) {
            return Err(Error::Field(format!("{} is not finite at {:?}", self.role, g.id(v))));
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        ScalarField {
            role: self.role,
            values: self.values.iter().map(|x| x.map(|x| c * x)).collect(),
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> ScalarField {
        ScalarField {
            role: self.role,
            values: self.values.iter().map(|x| x.map(&f)).collect(),
        }
    }

    /// Transfers the field to a refined graph by linear interpolation.
    pub fn interpolate(&self, origin: &[VertexOrigin]) -> ScalarField {
        let values = origin
            .iter()
            .map(|o| match *o {
                VertexOrigin::Original(v) => self.get(v),
                VertexOrigin::OnEdge { a, b, t } => match (self.get(a), self.get(b)) {
                    (Some(x), Some(y)) => Some(x + t * (y - x)),
                    _ => None,
                },
            })
            .collect();
        ScalarField {
            role: self.role,
            values,
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCost {
    pub edge: usize,
    pub cost: f64,
}

/// `∫ f ds` over an edge; the trapezoid rule is exact for the linear interpolant.
pub fn edge_cost(g: &MetricGraph, f: &ScalarField, edge: usize) -> Result<EdgeCost> {
    if f.role() != FieldRole::Rhs {
        return Err(Error::Field(format!("edge cost needs rhs_f, got {}", f.role())));
    }
    let e = g.edge(edge);
    let fa = f.value(g, e.a)?;
    let fb = f.value(g, e.b)?;
    Ok(EdgeCost {
        edge,
        cost: trapezoid(e.length, fa, fb),
    })
}

pub(crate) fn trapezoid(length: f64, fa: f64, fb: f64) -> f64 {
    length * (fa + fb) / 2.0
}

/// All edge costs, indexed like `g.edges()`.
pub fn edge_costs(g: &MetricGraph, f: &ScalarField) -> Result<Vec<f64>> {
    f.check_len(g)?;
    (0..g.edge_count())
        .map(|k| edge_cost(g, f, k).map(|c| c.cost))
        .collect()
}

/// Lipschitz constant of the piecewise-linear interpolant with respect to arc length.
pub fn lipschitz_constant(g: &MetricGraph, f: &ScalarField) -> Result<f64> {
    let vals = f.dense(g)?;
    Ok(g.edges()
        .iter()
        .map(|e| (vals[e.a] - vals[e.b]).abs() / e.length)
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldReport {
    pub threshold: f64,
    /// `(vertex id, value)` for every vertex with `f < threshold`.
    pub below: Vec<(String, f64)>,
    pub missing: Vec<String>,
    pub pass: bool,
}

/// Lists vertices where `f` falls below `threshold`. Threshold 0 accepts any
/// nonnegative field, which is enough for subsolution checks.
pub fn validate_field(g: &MetricGraph, f: &ScalarField, threshold: f64) -> FieldReport {
    let mut below = Vec::new();
    let mut missing = Vec::new();
    for v in 0..g.len() {
        match f.get(v) {
            Some(x) if x < threshold || x.is_nan() => below.push((g.id(v).to_string(), x)),
            Some(_) => {}
            None => missing.push(g.id(v).to_string()),
        }
    }
    let pass = below.is_empty() && missing.is_empty();
    FieldReport {
        threshold,
        below,
        missing,
        pass,
    }
}

/// Inline field description: `const:c` or `linear:a,b[,axis]` (meaning
/// `a + b * coord[axis]`, axis 0 by default).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldExpr {
    Const(f64),
    Linear { a: f64, b: f64, axis: usize },
}

impl FromStr for FieldExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<FieldExpr> {
        let bad = || Error::Parse(format!("invalid field expression {s:?}"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<&str> = args.split(',').map(str::trim).collect();
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
        match (kind.trim(), nums.as_slice()) {
            ("const", [c]) => Ok(FieldExpr::Const(num(c)?)),
            ("linear", [a, b]) => Ok(FieldExpr::Linear {
                a: num(a)?,
                b: num(b)?,
                axis: 0,
            }),
            ("linear", [a, b, axis]) => Ok(FieldExpr::Linear {
                a: num(a)?,
                b: num(b)?,
                axis: axis.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

impl FieldExpr {
    /// Evaluates at every vertex, or at boundary vertices for Dirichlet data.
    pub fn evaluate(&self, g: &MetricGraph, role: FieldRole) -> Result<ScalarField> {
        let at = |v: usize| -> Result<f64> {
            match *self {
                FieldExpr::Const(c) => Ok(c),
                FieldExpr::Linear { a, b, axis } => {
                    let x = g
                        .coords(v)
                        .and_then(|c| c.get(axis).copied())
                        .ok_or_else(|| {
                            Error::Field(format!("vertex {:?} has no coordinate {axis}", g.id(v)))
                        })?;
                    Ok(a + b * x)
                }
            }
        };
        if role == FieldRole::BoundaryData {
            let pairs = g
                .boundary()
                .map(|v| at(v).map(|z| (v, z)))
                .collect::<Result<Vec<_>>>()?;
            Ok(ScalarField::boundary_data(g, pairs))
        } else {
            let vals = (0..g.len()).map(at).collect::<Result<Vec<_>>>()?;
            Ok(ScalarField::new(role, vals))
        }
    }
}
