mod common;

use eikograph::fields::{edge_cost, edge_costs, validate_field, FieldRole, ScalarField};
use eikograph::metric::{
    ball, build_graph, induce_intrinsic, intrinsic_distance, refine, refine_mapped, ChordInput, DistanceSource,
    EdgeSpec, GraphSpec, InduceOptions, MetricGraph, VertexSpec,
};
use eikograph::solver::quasiconvexity_probe;
use eikograph::verify::{fixture, FixtureKind};
use eikograph::Error;

use common::{floyd_warshall, random_instance, SEED};

fn spec(vertices: &[(&str, Option<Vec<f64>>)], edges: &[(&str, &str, f64)], boundary: &[&str]) -> GraphSpec {
    GraphSpec {
        version: 1,
        vertices: vertices
            .iter()
            .map(|(id, c)| VertexSpec {
                id: id.to_string(),
                coords: c.clone(),
            })
            .collect(),
        edges: edges
            .iter()
            .map(|(a, b, l)| EdgeSpec {
                a: a.to_string(),
                b: b.to_string(),
                length: *l,
            })
            .collect(),
        boundary: boundary.iter().map(|s| s.to_string()).collect(),
    }
}

fn half_steps() -> MetricGraph {
    let ids = ["-1", "-0.5", "0", "0.5", "1"];
    let vertices: Vec<_> = ids.iter().map(|&id| (id, Some(vec![id.parse::<f64>().unwrap()]))).collect();
    let edges: Vec<_> = ids.windows(2).map(|w| (w[0], w[1], 0.5)).collect();
    build_graph(&spec(&vertices, &edges, &["-1", "1"])).unwrap()
}

#[test]
fn interval_of_four_half_edges() {
    let g = half_steps();
    assert_eq!((g.len(), g.edge_count(), g.boundary_count()), (5, 4, 2));
    let (d, curve) = intrinsic_distance(&g, g.vertex("-1").unwrap(), g.vertex("1").unwrap());
    assert_eq!(d, 2.0);
    assert_eq!(curve.vertices().len(), 5);
}

#[test]
fn unit_triangle_distances() {
    let g = build_graph(&spec(
        &[("a", None), ("b", None), ("c", None)],
        &[("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)],
        &[],
    ))
    .unwrap();
    for x in 0..3 {
        for y in 0..3 {
            assert_eq!(intrinsic_distance(&g, x, y).0, if x == y { 0.0 } else { 1.0 });
        }
    }
}

#[test]
fn zero_length_edge_is_a_validation_error() {
    let err = build_graph(&spec(&[("a", None), ("b", None)], &[("a", "b", 0.0)], &[])).unwrap_err();
    assert!(matches!(err, Error::Validation(_)));
}

#[test]
fn distances_match_all_pairs_oracle() {
    for i in 0..5 {
        let g = random_instance(SEED + 50 + i, 50).graph;
        let oracle = floyd_warshall(&g, None);
        for x in 0..g.len() {
            for y in 0..g.len() {
                let (d, curve) = intrinsic_distance(&g, x, y);
                assert!((d - oracle[x][y]).abs() <= 1e-12, "{x} {y}: {d} vs {}", oracle[x][y]);
                assert!((curve.length() - d).abs() <= 1e-12 * d.max(1.0));
                assert_eq!((curve.start(), curve.end()), (x, y));
            }
        }
    }
}

#[test]
fn collinear_chords_induce_the_same_metric() {
    let n = 20;
    let xs: Vec<f64> = (0..n).map(|k| (k * k) as f64 / 37.0).collect();
    let table: Vec<Vec<f64>> = xs.iter().map(|a| xs.iter().map(|b| (a - b).abs()).collect()).collect();
    let input = ChordInput {
        ids: (0..n).map(|k| format!("s{k}")).collect(),
        coords: None,
        distance: DistanceSource::Table(table.clone()),
        adjacency: (0..n - 1).map(|k| (k, k + 1)).collect(),
        boundary: vec![],
    };
    let (g, report) = induce_intrinsic(&input, InduceOptions::default()).unwrap();
    assert!(report.max_excess <= 1e-12);
    for x in 0..n {
        let d = g.distances_from(x);
        for y in 0..n {
            assert!((d[y] - table[x][y]).abs() <= 1e-12);
        }
    }
}

#[test]
fn l_shaped_polyline_length_is_segment_sum() {
    let pts = [[0.0, 0.0], [0.3, 0.0], [1.0, 0.0], [1.0, 0.25], [1.0, 2.0]];
    let input = ChordInput {
        ids: (0..pts.len()).map(|k| format!("q{k}")).collect(),
        coords: Some(pts.iter().map(|p| p.to_vec()).collect()),
        distance: DistanceSource::Euclidean,
        adjacency: (0..pts.len() - 1).map(|k| (k, k + 1)).collect(),
        boundary: vec!["q0".into()],
    };
    let (g, _) = induce_intrinsic(&input, InduceOptions::default()).unwrap();
    let mut sum = 0.0;
    for w in pts.windows(2) {
        sum += ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
    }
    let (d, _) = intrinsic_distance(&g, 0, pts.len() - 1);
    assert!((d - sum).abs() <= 1e-12);
    assert!(d > input.distance(0, pts.len() - 1));
}

#[test]
fn metric_violations_are_reported() {
    let table = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
    let input = ChordInput {
        ids: vec!["a".into(), "b".into(), "c".into()],
        coords: None,
        distance: DistanceSource::Table(table),
        adjacency: vec![(0, 1), (1, 2)],
        boundary: vec![],
    };
    assert!(matches!(induce_intrinsic(&input, InduceOptions::default()), Err(Error::Metric(_))));
}

#[test]
fn refinement_examples() {
    let g = build_graph(&spec(&[("a", None), ("b", None)], &[("a", "b", 1.0)], &["a"])).unwrap();
    let r = refine(&g, 0.25);
    assert_eq!((r.len(), r.edge_count()), (5, 4));
    assert_eq!(refine(&g, 1.0), g);
    assert_eq!(refine(&g, 3.0), g);
}

#[test]
fn refinement_keeps_original_distances() {
    for i in 0..5 {
        let g = random_instance(SEED + 80 + i, 30).graph;
        let r = refine_mapped(&g, 0.07);
        for x in 0..g.len() {
            let before = g.distances_from(x);
            let after = r.graph.distances_from(x);
            for y in 0..g.len() {
                assert!((before[y] - after[y]).abs() <= 1e-12 * before[y].max(1.0));
            }
        }
    }
}

#[test]
fn ball_examples() {
    let g = half_steps();
    let center = g.vertex("0").unwrap();
    let b = ball(&g, center, 0.6);
    let mut ids: Vec<&str> = b.members.iter().map(|&(v, _)| g.id(v)).collect();
    ids.sort();
    assert_eq!(ids, ["-0.5", "0", "0.5"]);
    assert_eq!(ball(&g, center, 0.4).members, vec![(center, 0.0)]);

    let big = ball(&g, center, 100.0);
    assert_eq!(big.members.len(), g.len());
    let oracle = floyd_warshall(&g, None);
    for &(v, d) in &big.members {
        assert_eq!(d, oracle[center][v]);
    }
}

#[test]
fn edge_cost_examples() {
    let g = build_graph(&spec(&[("a", None), ("b", None)], &[("a", "b", 2.5)], &[])).unwrap();
    let ones = ScalarField::constant(&g, FieldRole::Rhs, 1.0);
    assert_eq!(edge_cost(&g, &ones, 0).unwrap().cost, 2.5);

    let g = build_graph(&spec(&[("a", None), ("b", None)], &[("a", "b", 1.0)], &[])).unwrap();
    let f = ScalarField::new(FieldRole::Rhs, vec![0.0, 2.0]);
    assert_eq!(edge_cost(&g, &f, 0).unwrap().cost, 1.0);
}

#[test]
fn squared_coordinate_integrates_to_a_third() {
    let g = build_graph(&spec(
        &[("a", Some(vec![0.0])), ("b", Some(vec![1.0]))],
        &[("a", "b", 1.0)],
        &["a"],
    ))
    .unwrap();
    let fine = refine(&g, 1e-3);
    let f = ScalarField::from_fn(&fine, FieldRole::Rhs, |v| fine.coords(v).unwrap()[0].powi(2));
    let total: f64 = edge_costs(&fine, &f).unwrap().iter().sum();
    assert!((total - 1.0 / 3.0).abs() <= 1e-6, "{total}");
}

#[test]
fn field_validation_examples() {
    let g = half_steps();
    assert!(validate_field(&g, &ScalarField::constant(&g, FieldRole::Rhs, 1.0), 1e-6).pass);
    let mut vals = vec![1.0; g.len()];
    vals[g.vertex("0").unwrap()] = 0.0;
    let rep = validate_field(&g, &ScalarField::new(FieldRole::Rhs, vals), 1e-6);
    assert!(!rep.pass);
    assert_eq!(rep.below, vec![("0".to_string(), 0.0)]);
    assert!(validate_field(&g, &ScalarField::constant(&g, FieldRole::Rhs, 0.0), 0.0).pass);
}

#[test]
fn quasiconvexity_on_whole_graphs_is_identity() {
    for kind in [FixtureKind::Interval { n: 20 }, FixtureKind::Grid { n: 6, connectivity: 4 }] {
        let g = fixture(kind).unwrap().graph;
        let all: Vec<usize> = (0..g.len()).collect();
        let est = quasiconvexity_probe(&g, &all).unwrap();
        assert!((est.max_ratio - 1.0).abs() <= 1e-12);
        for &(t, s) in &est.steps {
            assert!((s - t).abs() <= 1e-12);
        }
    }
}

#[test]
fn quasiconvexity_on_annulus_with_gap() {
    // 8x8 grid; subset is a square ring around the center with the bottom
    // of the ring removed, so pairs across the cut must go the long way
    let g = fixture(FixtureKind::Grid { n: 8, connectivity: 4 }).unwrap().graph;
    let inside: Vec<bool> = (0..g.len())
        .map(|v| {
            let (i, j) = parse_grid_id(g.id(v));
            let r = (2 * i as i64 - 7).abs().max((2 * j as i64 - 7).abs());
            let ring = (3..=5).contains(&r);
            let gap = (i == 3 || i == 4) && j < 3;
            ring && !gap
        })
        .collect();
    let subset: Vec<usize> = (0..g.len()).filter(|&v| inside[v]).collect();
    let est = quasiconvexity_probe(&g, &subset).unwrap();
    assert!(est.max_ratio > 1.0);

    let free = floyd_warshall(&g, None);
    let within = floyd_warshall(&g, Some(&inside));
    let mut oracle_ratio = 0.0f64;
    for &x in &subset {
        for &y in &subset {
            if x < y {
                oracle_ratio = oracle_ratio.max(within[x][y] / free[x][y]);
            }
        }
    }
    assert!((est.max_ratio - oracle_ratio).abs() <= 1e-12);
    let pair = est.worst_pair.unwrap();
    let (x, y) = (g.vertex(&pair.x).unwrap(), g.vertex(&pair.y).unwrap());
    assert!((within[x][y] / free[x][y] - oracle_ratio).abs() <= 1e-12);
    let top = est.steps.last().unwrap();
    assert!(top.1 > top.0);
}

#[test]
fn quasiconvexity_rejects_disconnected_subsets() {
    let g = fixture(FixtureKind::Interval { n: 10 }).unwrap().graph;
    let err = quasiconvexity_probe(&g, &[0, 5]).unwrap_err();
    assert!(matches!(err, Error::Connectivity(_)));
}

fn parse_grid_id(id: &str) -> (usize, usize) {
    let (i, j) = id.split_once('_').unwrap();
    (i.parse().unwrap(), j.parse().unwrap())
}
