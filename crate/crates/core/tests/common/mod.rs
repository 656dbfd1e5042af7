//! Independent oracles and generators shared by the integration tests.
//! Nothing here calls into the solver; edge costs and distances are
//! recomputed from the raw graph.

#![allow(dead_code)]

use eikograph::fields::{FieldRole, ScalarField};
use eikograph::metric::{build_graph, EdgeSpec, GraphSpec, MetricGraph, VertexSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 7_919;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Value iteration `u(x) = min(ζ(x), min_y cost(x, y) + u(y))` run to a
/// fixed point. Costs use the trapezoid rule on the raw field values.
pub fn bellman_ford(g: &MetricGraph, f: &[f64], zeta: &[Option<f64>]) -> Vec<f64> {
    let n = g.len();
    let mut u: Vec<f64> = (0..n).map(|v| zeta[v].unwrap_or(f64::INFINITY)).collect();
    let edges: Vec<(usize, usize, f64)> = g
        .edges()
        .iter()
        .map(|e| (e.a, e.b, e.length * (f[e.a] + f[e.b]) / 2.0))
        .collect();
    for _ in 0..=n {
        let mut changed = false;
        for &(a, b, c) in &edges {
            for (x, y) in [(a, b), (b, a)] {
                let cand = u[y] + c;
                if cand < u[x] {
                    u[x] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    u
}

/// All-pairs shortest path lengths, optionally restricted to a vertex subset.
pub fn floyd_warshall(g: &MetricGraph, allowed: Option<&[bool]>) -> Vec<Vec<f64>> {
    let n = g.len();
    let ok = |v: usize| allowed.is_none_or(|a| a[v]);
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for v in 0..n {
        if ok(v) {
            d[v][v] = 0.0;
        }
    }
    for e in g.edges() {
        if ok(e.a) && ok(e.b) {
            d[e.a][e.b] = d[e.a][e.b].min(e.length);
            d[e.b][e.a] = d[e.b][e.a].min(e.length);
        }
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k].is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

pub struct RandomInstance {
    pub graph: MetricGraph,
    pub f: ScalarField,
    pub zeta: ScalarField,
}

/// Connected random graph: random spanning tree plus extra chords, lengths
/// in [0.05, 1], f in [0.5, 2], ζ in [0, 1] on 1 to 3 boundary vertices.
pub fn random_instance(seed: u64, max_n: usize) -> RandomInstance {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_n.max(2));
    let ids: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    for i in 1..n {
        let j = r.gen_range(0..i);
        edges.push(EdgeSpec {
            a: ids[j].clone(),
            b: ids[i].clone(),
            length: r.gen_range(0.05..1.0),
        });
    }
    for _ in 0..r.gen_range(0..=n) {
        let a = r.gen_range(0..n);
        let b = r.gen_range(0..n);
        if a != b {
            edges.push(EdgeSpec {
                a: ids[a].clone(),
                b: ids[b].clone(),
                length: r.gen_range(0.05..1.0),
            });
        }
    }
    let nb = r.gen_range(1..=3.min(n));
    let mut boundary: Vec<String> = Vec::new();
    while boundary.len() < nb {
        let id = ids[r.gen_range(0..n)].clone();
        if !boundary.contains(&id) {
            boundary.push(id);
        }
    }
    let spec = GraphSpec {
        version: 1,
        vertices: ids
            .iter()
            .map(|id| VertexSpec {
                id: id.clone(),
                coords: None,
            })
            .collect(),
        edges,
        boundary,
    };
    let graph = build_graph(&spec).expect("random graph is valid");
    let f = ScalarField::from_fn(&graph, FieldRole::Rhs, |_| r.gen_range(0.5..2.0));
    let zeta = ScalarField::boundary_data(&graph, graph.boundary().map(|v| (v, r.gen_range(0.0..1.0))).collect::<Vec<_>>());
    RandomInstance { graph, f, zeta }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
