//! Finite metric graphs and their intrinsic (shortest-path) metric.
//!
//! A [`MetricGraph`] stands in for a compact length space: vertices joined by
//! edges of positive arc length. Every admissible curve between two vertices
//! is a vertex path, so the infimum over rectifiable curves that defines the
//! intrinsic metric is a shortest-path distance and is always attained.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute part of the default comparison tolerance.
pub const ABS_TOL: f64 = 1e-12;
/// Relative part of the default comparison tolerance.
pub const REL_TOL: f64 = 1e-9;

/// `a == b` up to `ABS_TOL + REL_TOL * max(|a|, |b|)`.
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= ABS_TOL + REL_TOL * a.abs().max(b.abs())
}

pub const GRAPH_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub a: String,
    pub b: String,
    pub length: f64,
}

/// Serialized graph description (the graph file schema).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    #[serde(default = "default_version")]
    pub version: u32,
    pub vertices: Vec<VertexSpec>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default)]
    pub boundary: Vec<String>,
}

fn default_version() -> u32 {
    GRAPH_FORMAT_VERSION
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

impl Edge {
    /// The endpoint opposite to `v`.
    pub fn other(&self, v: usize) -> usize {
        if self.a == v {
            self.b
        } else {
            self.a
        }
    }
}

/// A validated, connected, immutable metric graph.
#[derive(Debug, Clone)]
pub struct MetricGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    coords: Vec<Option<Vec<f64>>>,
    edges: Vec<Edge>,
    // (neighbor, edge index), sorted by neighbor id
    adjacency: Vec<Vec<(usize, usize)>>,
    boundary: Vec<bool>,
}

impl PartialEq for MetricGraph {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids
            && self.coords == other.coords
            && self.edges == other.edges
            && self.boundary == other.boundary
    }
}

/// Validates a graph description and builds the graph.
pub fn build_graph(spec: &GraphSpec) -> Result<MetricGraph> {
    if spec.vertices.is_empty() {
        return Err(Error::Validation("graph has no vertices".into()));
    }
    let mut ids = Vec::with_capacity(spec.vertices.len());
    let mut index = HashMap::with_capacity(spec.vertices.len());
    let mut coords = Vec::with_capacity(spec.vertices.len());
    for v in &spec.vertices {
        if index.insert(v.id.clone(), ids.len()).is_some() {
            return Err(Error::Validation(format!("duplicate vertex id {:?}", v.id)));
        }
        if let Some(c) = &v.coords {
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("non-finite coords at {:?}", v.id)));
            }
        }
        ids.push(v.id.clone());
        coords.push(v.coords.clone());
    }

    let lookup = |id: &str| -> Result<usize> {
        index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    };

    let mut edges: Vec<Edge> = Vec::with_capacity(spec.edges.len());
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for e in &spec.edges {
        let a = lookup(&e.a)?;
        let b = lookup(&e.b)?;
        if a == b {
            return Err(Error::Validation(format!("self-loop at {:?}", e.a)));
        }
        if !(e.length.is_finite() && e.length > 0.0) {
            return Err(Error::Validation(format!(
                "edge {:?}-{:?} has nonpositive length {}",
                e.a, e.b, e.length
            )));
        }
        let key = (a.min(b), a.max(b));
        match seen.get(&key) {
            Some(&k) => {
                if e.length < edges[k].length {
                    edges[k].length = e.length;
                }
            }
            None => {
                seen.insert(key, edges.len());
                edges.push(Edge {
                    a: key.0,
                    b: key.1,
                    length: e.length,
                });
            }
        }
    }

    let mut boundary = vec![false; ids.len()];
    for id in &spec.boundary {
        boundary[lookup(id)?] = true;
    }

    let mut adjacency = vec![Vec::new(); ids.len()];
    for (k, e) in edges.iter().enumerate() {
        adjacency[e.a].push((e.b, k));
        adjacency[e.b].push((e.a, k));
    }
    for list in &mut adjacency {
        list.sort_by(|x, y| ids[x.0].cmp(&ids[y.0]));
    }

    let g = MetricGraph {
        ids,
        index,
        coords,
        edges,
        adjacency,
        boundary,
    };
    g.check_connected()?;
    Ok(g)
}

impl MetricGraph {
    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        if count == self.len() {
            Ok(())
        } else {
            let missing = seen.iter().position(|s| !s).unwrap();
            Err(Error::Connectivity(format!(
                "vertex {:?} unreachable from {:?}",
                self.ids[missing], self.ids[0]
            )))
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vertex(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn coords(&self, v: usize) -> Option<&[f64]> {
        self.coords[v].as_deref()
    }

    pub fn has_coords(&self) -> bool {
        self.coords.iter().all(Option::is_some)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, k: usize) -> &Edge {
        &self.edges[k]
    }

    /// Neighbors of `v` as `(neighbor, edge index)`, ordered by neighbor id.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Index of the edge joining `a` and `b`, if any.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|&&(w, _)| w == b)
            .map(|&(_, k)| k)
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&v| self.boundary[v])
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&v| !self.boundary[v])
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.iter().filter(|&&b| b).count()
    }

    /// Vertices with at least one boundary neighbor.
    pub fn is_boundary_adjacent(&self, v: usize) -> bool {
        self.adjacency[v].iter().any(|&(w, _)| self.boundary[w])
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(0.0, f64::max)
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.length)
            .fold(f64::INFINITY, f64::min)
    }

    /// Longest edge incident to `v` (0 for an isolated vertex).
    pub fn max_incident_length(&self, v: usize) -> f64 {
        self.adjacency[v]
            .iter()
            .map(|&(_, k)| self.edges[k].length)
            .fold(0.0, f64::max)
    }

    /// Same graph with a different boundary set.
    pub fn with_boundary<S: AsRef<str>>(&self, boundary: &[S]) -> Result<MetricGraph> {
        let mut flags = vec![false; self.len()];
        for id in boundary {
            flags[self.vertex(id.as_ref())?] = true;
        }
        let mut g = self.clone();
        g.boundary = flags;
        Ok(g)
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            version: GRAPH_FORMAT_VERSION,
            vertices: self
                .ids
                .iter()
                .zip(&self.coords)
                .map(|(id, c)| VertexSpec {
                    id: id.clone(),
                    coords: c.clone(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    a: self.ids[e.a].clone(),
                    b: self.ids[e.b].clone(),
                    length: e.length,
                })
                .collect(),
            boundary: self.boundary().map(|v| self.ids[v].clone()).collect(),
        }
    }

    /// Single- or multi-source label-setting shortest paths with per-edge
    /// weights. Sources carry initial labels. Exploration stops once the
    /// smallest open label reaches `limit`.
    pub fn shortest_paths<W>(&self, sources: &[(usize, f64)], weight: W, limit: f64) -> ShortestPaths
    where
        W: Fn(usize) -> f64,
    {
        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut origin = vec![usize::MAX; n];
        let mut pred = vec![usize::MAX; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        for &(s, label) in sources {
            if label < dist[s] {
                dist[s] = label;
                origin[s] = s;
                heap.push(Label { value: label, vertex: s });
            }
        }
        while let Some(Label { value, vertex: v }) = heap.pop() {
            if done[v] || value > dist[v] {
                continue;
            }
            if value >= limit {
                break;
            }
            done[v] = true;
            for &(w, k) in &self.adjacency[v] {
                if done[w] {
                    continue;
                }
                let cand = value + weight(k);
                if cand < dist[w] {
                    dist[w] = cand;
                    origin[w] = origin[v];
                    pred[w] = v;
                    heap.push(Label { value: cand, vertex: w });
                }
            }
        }
        ShortestPaths {
            dist,
            origin,
            pred,
            settled: done,
        }
    }

    /// Intrinsic distances from `x` to every vertex.
    pub fn distances_from(&self, x: usize) -> Vec<f64> {
        self.shortest_paths(&[(x, 0.0)], |k| self.edges[k].length, f64::INFINITY)
            .dist
    }

    /// Graph distance from every vertex to the boundary set.
    pub fn distance_to_boundary(&self) -> Vec<f64> {
        let sources: Vec<(usize, f64)> = self.boundary().map(|v| (v, 0.0)).collect();
        self.shortest_paths(&sources, |k| self.edges[k].length, f64::INFINITY)
            .dist
    }
}

#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub dist: Vec<f64>,
    /// Source that realizes each label (`usize::MAX` if unreached).
    pub origin: Vec<usize>,
    pub pred: Vec<usize>,
    pub settled: Vec<bool>,
}

#[derive(Debug, Clone, Copy)]
struct Label {
    value: f64,
    vertex: usize,
}

impl PartialEq for Label {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Label {}

impl Ord for Label {
    // min-heap on value, ties by smaller vertex index
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .total_cmp(&self.value)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A unit-speed vertex path with cumulative arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    vertices: Vec<usize>,
    arclength: Vec<f64>,
}

impl Curve {
    pub fn new(g: &MetricGraph, vertices: Vec<usize>) -> Result<Curve> {
        if vertices.is_empty() {
            return Err(Error::Validation("curve needs at least one vertex".into()));
        }
        let mut arclength = Vec::with_capacity(vertices.len());
        arclength.push(0.0);
        for pair in vertices.windows(2) {
            let k = g.edge_between(pair[0], pair[1]).ok_or_else(|| {
                Error::Validation(format!(
                    "{:?} and {:?} are not adjacent",
                    g.id(pair[0]),
                    g.id(pair[1])
                ))
            })?;
            let last = *arclength.last().unwrap();
            arclength.push(last + g.edge(k).length);
        }
        Ok(Curve {
            vertices,
            arclength,
        })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn arclength(&self) -> &[f64] {
        &self.arclength
    }

    pub fn length(&self) -> f64 {
        *self.arclength.last().unwrap()
    }

    pub fn start(&self) -> usize {
        self.vertices[0]
    }

    pub fn end(&self) -> usize {
        *self.vertices.last().unwrap()
    }
}

/// Shortest-path distance between `x` and `y` with a witness path.
///
/// Among all shortest paths the witness is the one whose vertex-id sequence
/// is lexicographically smallest.
pub fn intrinsic_distance(g: &MetricGraph, x: usize, y: usize) -> (f64, Curve) {
    let to_y = g.distances_from(y);
    let mut path = vec![x];
    let mut v = x;
    while v != y {
        let next = g.neighbors(v).iter().find(|&&(w, k)| {
            to_y[w] < to_y[v] && approx_eq(g.edge(k).length + to_y[w], to_y[v])
        });
        // connectivity guarantees a descending neighbor
        v = next.expect("no descending neighbor on a connected graph").0;
        path.push(v);
    }
    let curve = Curve::new(g, path).expect("path follows edges");
    (to_y[x], curve)
}

/// Vertices at intrinsic distance strictly less than `radius` from a center.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSet {
    pub center: usize,
    pub radius: f64,
    /// `(vertex, distance)` ordered by distance, then vertex id.
    pub members: Vec<(usize, f64)>,
}

impl BallSet {
    pub fn contains(&self, v: usize) -> bool {
        self.members.iter().any(|&(w, _)| w == v)
    }
}

pub fn ball(g: &MetricGraph, x: usize, radius: f64) -> BallSet {
    let sp = g.shortest_paths(&[(x, 0.0)], |k| g.edge(k).length, radius);
    let mut members: Vec<(usize, f64)> = (0..g.len())
        .filter(|&v| sp.settled[v] && sp.dist[v] < radius)
        .map(|v| (v, sp.dist[v]))
        .collect();
    members.sort_by(|p, q| p.1.total_cmp(&q.1).then_with(|| g.id(p.0).cmp(g.id(q.0))));
    BallSet {
        center: x,
        radius,
        members,
    }
}

/// Where a vertex of a refined graph came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VertexOrigin {
    Original(usize),
    /// Point at fraction `t` of the way from `a` to `b` along an original edge.
    OnEdge { a: usize, b: usize, t: f64 },
}

#[derive(Debug, Clone)]
pub struct Refinement {
    pub graph: MetricGraph,
    pub origin: Vec<VertexOrigin>,
}

/// Subdivides every edge into equal parts of length at most `h_max`.
pub fn refine(g: &MetricGraph, h_max: f64) -> MetricGraph {
    refine_mapped(g, h_max).graph
}

pub fn refine_mapped(g: &MetricGraph, h_max: f64) -> Refinement {
    assert!(h_max > 0.0, "refine needs h_max > 0");
    let mut spec = g.to_spec();
    let mut origin: Vec<VertexOrigin> = (0..g.len()).map(VertexOrigin::Original).collect();
    let mut edges = Vec::with_capacity(spec.edges.len());
    for e in g.edges() {
        let parts = subdivisions(e.length, h_max);
        if parts == 1 {
            edges.push(EdgeSpec {
                a: g.id(e.a).to_string(),
                b: g.id(e.b).to_string(),
                length: e.length,
            });
            continue;
        }
        let piece = e.length / parts as f64;
        let mut prev = g.id(e.a).to_string();
        for k in 1..=parts {
            let next = if k == parts {
                g.id(e.b).to_string()
            } else {
                let t = k as f64 / parts as f64;
                let id = format!("{}~{}~{}", g.id(e.a), g.id(e.b), k);
                let coords = match (g.coords(e.a), g.coords(e.b)) {
                    (Some(ca), Some(cb)) => Some(
                        ca.iter()
                            .zip(cb)
                            .map(|(p, q)| p + t * (q - p))
                            .collect(),
                    ),
                    _ => None,
                };
                spec.vertices.push(VertexSpec {
                    id: id.clone(),
                    coords,
                });
                origin.push(VertexOrigin::OnEdge { a: e.a, b: e.b, t });
                id
            };
            edges.push(EdgeSpec {
                a: prev,
                b: next.clone(),
                length: piece,
            });
            prev = next;
        }
    }
    spec.edges = edges;
    let graph = build_graph(&spec).expect("refinement of a valid graph is valid");
    Refinement { graph, origin }
}

fn subdivisions(length: f64, h_max: f64) -> usize {
    let ratio = length / h_max;
    // absorb rounding so that length == k * h_max yields exactly k parts
    let parts = (ratio * (1.0 - 1e-12)).ceil();
    parts.max(1.0) as usize
}

/// Chord distances for [`ChordInput`].
pub enum DistanceSource {
    Table(Vec<Vec<f64>>),
    /// Euclidean distance between the input coordinates.
    Euclidean,
    Callback(Box<dyn Fn(usize, usize) -> f64 + Send + Sync>),
}

/// Points with a chord metric and the pairs joined by an edge.
pub struct ChordInput {
    pub ids: Vec<String>,
    pub coords: Option<Vec<Vec<f64>>>,
    pub distance: DistanceSource,
    pub adjacency: Vec<(usize, usize)>,
    pub boundary: Vec<String>,
}

impl ChordInput {
    pub fn distance(&self, x: usize, y: usize) -> f64 {
        match &self.distance {
            DistanceSource::Table(t) => t[x][y],
            DistanceSource::Euclidean => {
                let c = self.coords.as_ref().expect("euclidean source needs coords");
                c[x].iter()
                    .zip(&c[y])
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()
                    .sqrt()
            }
            DistanceSource::Callback(f) => f(x, y),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct InduceOptions {
    /// Number of sampled triples for the triangle inequality and of
    /// sampled sources for the comparison `d <= d~`.
    pub samples: usize,
    pub seed: u64,
}

impl Default for InduceOptions {
    fn default() -> Self {
        InduceOptions {
            samples: 2000,
            seed: crate::DEFAULT_SEED,
        }
    }
}

/// Ratio statistics of `d~ / d` in one chord-distance bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleBin {
    pub max_chord: f64,
    pub max_intrinsic: f64,
    pub mean_ratio: f64,
    pub max_ratio: f64,
    pub pairs: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct InduceReport {
    pub sampled_triples: usize,
    pub sampled_pairs: usize,
    /// Largest `d - d~` over sampled pairs (nonpositive when consistent).
    pub max_excess: f64,
    /// Bins in increasing chord distance.
    pub bins: Vec<ScaleBin>,
    /// Heuristic reading of the smallest bin: `d~` stays within a constant
    /// multiple of `d` at the finest sampled scale. Never a certificate.
    pub small_scale_consistent: bool,
}

const PROBE_BINS: usize = 8;
const PROBE_RATIO_BOUND: f64 = 10.0;

/// Builds the graph whose edge lengths are chord distances; its shortest-path
/// metric is the induced intrinsic metric.
pub fn induce_intrinsic(input: &ChordInput, opts: InduceOptions) -> Result<(MetricGraph, InduceReport)> {
    let n = input.ids.len();
    if n == 0 {
        return Err(Error::Validation("no points".into()));
    }
    if let DistanceSource::Table(t) = &input.distance {
        if t.len() != n || t.iter().any(|row| row.len() != n) {
            return Err(Error::Metric(format!("distance table must be {n}x{n}")));
        }
    }
    if matches!(input.distance, DistanceSource::Euclidean) && input.coords.is_none() {
        return Err(Error::Metric("euclidean distances need coords".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    // axioms on sampled triples
    let mut triples = 0;
    for _ in 0..opts.samples {
        let x = rng.gen_range(0..n);
        let y = rng.gen_range(0..n);
        let z = rng.gen_range(0..n);
        let (dxy, dyx) = (input.distance(x, y), input.distance(y, x));
        if !approx_eq(dxy, dyx) {
            return Err(Error::Metric(format!(
                "asymmetric distance between {:?} and {:?}: {dxy} vs {dyx}",
                input.ids[x], input.ids[y]
            )));
        }
        if (x == y) != (dxy == 0.0) || dxy < 0.0 || !dxy.is_finite() {
            return Err(Error::Metric(format!(
                "d({:?}, {:?}) = {dxy} violates positivity",
                input.ids[x], input.ids[y]
            )));
        }
        let lhs = input.distance(x, z);
        let rhs = dxy + input.distance(y, z);
        if lhs > rhs && !approx_eq(lhs, rhs) {
            return Err(Error::Metric(format!(
                "triangle inequality fails on ({:?}, {:?}, {:?}): {lhs} > {rhs}",
                input.ids[x], input.ids[y], input.ids[z]
            )));
        }
        triples += 1;
    }

    let spec = GraphSpec {
        version: GRAPH_FORMAT_VERSION,
        vertices: input
            .ids
            .iter()
            .enumerate()
            .map(|(i, id)| VertexSpec {
                id: id.clone(),
                coords: input.coords.as_ref().map(|c| c[i].clone()),
            })
            .collect(),
        edges: input
            .adjacency
            .iter()
            .map(|&(a, b)| EdgeSpec {
                a: input.ids[a].clone(),
                b: input.ids[b].clone(),
                length: input.distance(a, b),
            })
            .collect(),
        boundary: input.boundary.clone(),
    };
    let g = build_graph(&spec).map_err(|e| match e {
        Error::Validation(m) => Error::Metric(m),
        other => other,
    })?;

    // d <= d~ on all pairs from a sample of sources
    let source_count = opts.samples.clamp(1, 32).min(n);
    let mut sources: Vec<usize> = (0..source_count).map(|_| rng.gen_range(0..n)).collect();
    sources.sort_unstable();
    sources.dedup();
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let mut max_excess = f64::NEG_INFINITY;
    for &s in &sources {
        let dt = g.distances_from(s);
        for (v, &intrinsic) in dt.iter().enumerate() {
            if v == s {
                continue;
            }
            let chord = input.distance(s, v);
            let excess = chord - intrinsic;
            max_excess = max_excess.max(excess);
            if excess > 0.0 && !approx_eq(chord, intrinsic) {
                return Err(Error::Metric(format!(
                    "chord distance {chord} exceeds path distance {intrinsic} between {:?} and {:?}",
                    input.ids[s], input.ids[v]
                )));
            }
            pairs.push((chord, intrinsic));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let bins = scale_bins(&pairs);
    let small_scale_consistent = bins
        .first()
        .map(|b| b.max_intrinsic <= PROBE_RATIO_BOUND * b.max_chord)
        .unwrap_or(true);
    let report = InduceReport {
        sampled_triples: triples,
        sampled_pairs: pairs.len(),
        max_excess: if pairs.is_empty() { 0.0 } else { max_excess },
        bins,
        small_scale_consistent,
    };
    Ok((g, report))
}

fn scale_bins(sorted: &[(f64, f64)]) -> Vec<ScaleBin> {
    if sorted.is_empty() {
        return Vec::new();
    }
    let per = sorted.len().div_ceil(PROBE_BINS);
    sorted
        .chunks(per)
        .map(|chunk| {
            let ratios = chunk.iter().map(|&(d, dt)| dt / d);
            ScaleBin {
                max_chord: chunk.iter().map(|p| p.0).fold(0.0, f64::max),
                max_intrinsic: chunk.iter().map(|p| p.1).fold(0.0, f64::max),
                mean_ratio: ratios.clone().sum::<f64>() / chunk.len() as f64,
                max_ratio: ratios.fold(0.0, f64::max),
                pairs: chunk.len(),
            }
        })
        .collect()
}
