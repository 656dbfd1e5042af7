//! Acceptance criteria 1-10. Each criterion prints one line
//! `criterion N <name>: PASS|FAIL <detail>`; the test fails if any line fails.
//! Every criterion also returns a byte artifact of its outputs, which
//! criterion 10 recomputes and compares.

mod common;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::process::Command;

use eikograph::fields::{FieldRole, ScalarField};
use eikograph::hamiltonian::{solve_general, validate_hamiltonian, GeneralOptions, HamiltonianSpec};
use eikograph::io::{write_plot_data, write_report, write_suite_report};
use eikograph::metric::{induce_intrinsic, intrinsic_distance, ChordInput, DistanceSource, InduceOptions, MetricGraph};
use eikograph::slope::{
    check_c_subsolution, check_c_supersolution, check_monge, check_regularity, default_tolerance, MongeMode,
};
use eikograph::solver::{check_boundary_consistency, solve_dirichlet, DirichletProblem};
use eikograph::verify::{
    compare, counterexample_suite, equivalence_suite, fixture, ComparisonInstance, ComparisonVerdict, FixtureKind,
};
use rand::Rng;

use common::{bellman_ford, max_abs_diff, random_instance, rng, SEED};

struct Outcome {
    pass: bool,
    detail: String,
    artifact: Vec<u8>,
}

fn outcome(pass: bool, detail: String, artifact: Vec<u8>) -> Outcome {
    Outcome { pass, detail, artifact }
}

fn values_csv(g: &MetricGraph, u: &[f64]) -> Vec<u8> {
    let mut s = String::new();
    for (v, x) in u.iter().enumerate() {
        writeln!(s, "{},{x:?}", g.id(v)).unwrap();
    }
    s.into_bytes()
}

fn interval(n: usize) -> MetricGraph {
    fixture(FixtureKind::Interval { n }).unwrap().graph
}

fn xcoord(g: &MetricGraph, v: usize) -> f64 {
    g.coords(v).unwrap()[0]
}

fn c1_interval_exactness() -> Outcome {
    let g = interval(200);
    let f = ScalarField::constant(&g, FieldRole::Rhs, 1.0);
    let zeta = ScalarField::constant_boundary(&g, 0.0);
    let vf = solve_dirichlet(&DirichletProblem::new(&g, &f, &zeta)).unwrap();
    let u = vf.values();
    let exact: Vec<f64> = (0..g.len()).map(|v| 1.0 - xcoord(&g, v).abs()).collect();
    let err = max_abs_diff(&u, &exact);
    let tol = default_tolerance(&g, &f).unwrap();
    let reports = [
        check_monge(&g, &vf.u, &f, tol, MongeMode::Solution).unwrap(),
        check_c_subsolution(&g, &vf.u, &f, 0.0).unwrap(),
        check_c_supersolution(&g, &vf.u, &f, tol).unwrap(),
        check_regularity(&g, &vf.u, tol).unwrap(),
    ];
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.check.as_str()).collect();
    let mut artifact = values_csv(&g, &u);
    for r in &reports {
        write_report(r, &mut artifact).unwrap();
    }
    outcome(
        err <= 1e-12 && failed.is_empty(),
        format!("max |u - (1-|x|)| = {err:e}, failed checks {failed:?}"),
        artifact,
    )
}

fn c2_counterexample_rejection() -> Outcome {
    let g = interval(200);
    let f = ScalarField::constant(&g, FieldRole::Rhs, 1.0);
    let u = ScalarField::from_fn(&g, FieldRole::Solution, |v| xcoord(&g, v).abs() - 1.0);
    let tol = default_tolerance(&g, &f).unwrap();
    let r = check_monge(&g, &u, &f, tol, MongeMode::Solution).unwrap();
    let failing: Vec<(String, f64)> = r.failures().map(|i| (i.id.clone(), i.residual)).collect();
    let ok = failing.len() == 1 && failing[0].0 == "0" && (failing[0].1 - 1.0).abs() <= 1e-12;
    let mut artifact = Vec::new();
    write_report(&r, &mut artifact).unwrap();
    outcome(ok, format!("failing vertices {failing:?}"), artifact)
}

fn c3_intrinsic_metric() -> Outcome {
    let n = 1000;
    let coords: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            vec![t.cos(), t.sin()]
        })
        .collect();
    let input = ChordInput {
        ids: (0..n).map(|k| format!("p{k}")).collect(),
        coords: Some(coords),
        distance: DistanceSource::Euclidean,
        adjacency: (0..n).map(|k| (k, (k + 1) % n)).collect(),
        boundary: vec![],
    };
    let (g, report) = induce_intrinsic(&input, InduceOptions::default()).unwrap();
    let (d, curve) = intrinsic_distance(&g, 0, n / 2);
    // chord metric never exceeds the induced one, checked on every pair from
    // a handful of sources, independently of the sampler
    let mut worst = f64::NEG_INFINITY;
    for x in (0..n).step_by(97) {
        let dt = g.distances_from(x);
        for y in 0..n {
            worst = worst.max(input.distance(x, y) - dt[y]);
        }
    }
    let ok = (d - PI).abs() <= 1e-4 && report.max_excess <= 1e-12 && worst <= 1e-12 && (curve.length() - d).abs() <= 1e-12;
    let artifact = format!("{d:?},{:?},{worst:?},{:?}\n", report.max_excess, curve.vertices()).into_bytes();
    outcome(
        ok,
        format!(
            "antipodal d~ = {d:.9} (|d~ - pi| = {:e}), sampled max(d - d~) = {:e}, sweep max(d - d~) = {worst:e}",
            (d - PI).abs(),
            report.max_excess
        ),
        artifact,
    )
}

fn c4_oracle_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    let mut artifact = Vec::new();
    for i in 0..20 {
        let inst = random_instance(SEED + i, 50);
        let vf = solve_dirichlet(&DirichletProblem::new(&inst.graph, &inst.f, &inst.zeta)).unwrap();
        let oracle = bellman_ford(&inst.graph, &inst.f.dense(&inst.graph).unwrap(), inst.zeta.raw());
        worst = worst.max(max_abs_diff(&vf.values(), &oracle));
        artifact.extend(values_csv(&inst.graph, &vf.values()));
    }
    for level in 0..=4 {
        let g = fixture(FixtureKind::Gasket { level }).unwrap().graph;
        let f = ScalarField::constant(&g, FieldRole::Rhs, 1.0);
        let zeta = ScalarField::constant_boundary(&g, 0.0);
        let vf = solve_dirichlet(&DirichletProblem::new(&g, &f, &zeta)).unwrap();
        let oracle = bellman_ford(&g, &vec![1.0; g.len()], zeta.raw());
        worst = worst.max(max_abs_diff(&vf.values(), &oracle));
        artifact.extend(values_csv(&g, &vf.values()));
    }
    outcome(
        worst <= 1e-12,
        format!("max deviation from value iteration over 20 random graphs and gasket(0..=4): {worst:e}"),
        artifact,
    )
}

fn c5_equivalence_suite() -> Outcome {
    let fix = fixture(FixtureKind::Grid { n: 32, connectivity: 4 }).unwrap();
    let g = &fix.graph;
    let f = ScalarField::from_fn(g, FieldRole::Rhs, |v| 1.0 + 0.5 * g.coords(v).unwrap()[0]);
    let zeta = ScalarField::constant_boundary(g, 0.0);
    let report = equivalence_suite(&fix, &f, &zeta, 3).unwrap();
    let mut artifact = Vec::new();
    write_suite_report(&report, &mut artifact).unwrap();
    let failed: Vec<String> = report
        .rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{}@{}", r.check, r.level))
        .collect();
    outcome(
        report.pass,
        format!(
            "monge residual per level {:?}, nonincreasing {}, failed {failed:?}",
            report.monge_residuals, report.monge_nonincreasing
        ),
        artifact,
    )
}

fn c6_comparison() -> Outcome {
    let mut r = rng(SEED ^ 0xC0FFEE);
    let mut passed = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut artifact = String::new();
    for i in 0..100u64 {
        let (g, f) = if i % 3 == 0 {
            let g = fixture(FixtureKind::Grid { n: 10, connectivity: 8 }).unwrap().graph;
            let slope = r.gen_range(-0.5..0.5);
            let f = ScalarField::from_fn(&g, FieldRole::Rhs, |v| 1.0 + slope * g.coords(v).unwrap()[0]);
            (g, f)
        } else {
            let inst = random_instance(SEED + 1000 + i, 50);
            (inst.graph, inst.f)
        };
        let zeta = ScalarField::constant_boundary(&g, 0.0);
        let v = solve_dirichlet(&DirichletProblem::new(&g, &f, &zeta)).unwrap().u;
        let lambda = 1.0 - r.gen::<f64>();
        let u = v.scaled(lambda);
        let inst = ComparisonInstance::new(&g, &f, &u, &v);
        let rep = compare(&inst).unwrap();
        worst = worst.max(rep.max_difference);
        if rep.verdict == ComparisonVerdict::Pass {
            passed += 1;
        }
        writeln!(artifact, "{i},{lambda:?},{:?},{:?}", rep.verdict, rep.max_difference).unwrap();
    }
    let g = interval(200);
    let f = ScalarField::constant(&g, FieldRole::Rhs, 1.0);
    let u = ScalarField::from_fn(&g, FieldRole::Solution, |v| 1.0 - xcoord(&g, v).abs());
    let v = u.scaled(0.5);
    let swapped = compare(&ComparisonInstance::new(&g, &f, &u, &v)).unwrap();
    writeln!(artifact, "swapped,{:?},{:?}", swapped.verdict, swapped.first_failed).unwrap();
    let ok = passed == 100 && worst <= 1e-12 && swapped.verdict == ComparisonVerdict::HypothesisFailed;
    outcome(
        ok,
        format!(
            "{passed}/100 instances pass, max(u - v) = {worst:e}; swapped instance {:?} at {:?}",
            swapped.verdict, swapped.first_failed
        ),
        artifact.into_bytes(),
    )
}

fn c7_hamiltonian_reduction() -> Outcome {
    let g = interval(200);
    let zeta = ScalarField::constant_boundary(&g, 0.0);
    let f = ScalarField::constant(&g, FieldRole::Rhs, 1.0);
    let eik = solve_dirichlet(&DirichletProblem::new(&g, &f, &zeta)).unwrap();
    let quad = solve_general(&g, &HamiltonianSpec::quadratic(1.0), &zeta, GeneralOptions::default()).unwrap();
    let quad_err = max_abs_diff(&quad.value.values(), &eik.values());

    let g2 = interval(2000);
    let zeta2 = ScalarField::constant_boundary(&g2, 0.0);
    let aff = solve_general(&g2, &HamiltonianSpec::affine_rho(1.0), &zeta2, GeneralOptions::default()).unwrap();
    let exact: Vec<f64> = (0..g2.len())
        .map(|v| 1.0 - (-(1.0 - xcoord(&g2, v).abs())).exp())
        .collect();
    let aff_err = max_abs_diff(&aff.value.values(), &exact);
    let mut artifact = values_csv(&g, &quad.value.values());
    artifact.extend(values_csv(&g2, &aff.value.values()));
    outcome(
        quad_err <= 1e-9 && aff_err <= 1e-5 && aff.iterations <= 100,
        format!(
            "quadratic vs eikonal {quad_err:e}; affine-rho error {aff_err:e} after {} Picard iterations",
            aff.iterations
        ),
        artifact,
    )
}

fn c8_counterexamples() -> Outcome {
    let g = interval(200);
    let mut rejected = Vec::new();
    let mut artifact = Vec::new();
    for h in [HamiltonianSpec::ex1(), HamiltonianSpec::ex2(), HamiltonianSpec::plateau()] {
        let rep = validate_hamiltonian(&h, &g, (-1.0, 1.0), 8).unwrap();
        writeln!(&mut artifact as &mut dyn std::io::Write, "{},{},{:?}", h.name, rep.pass, rep.counterexample.as_ref().map(|c| c.to_string())).unwrap();
        if !rep.pass {
            rejected.push(h.name.clone());
        }
    }
    let suite = counterexample_suite(200).unwrap();
    let plateau = suite.cases.iter().find(|c| c.hamiltonian == "plateau").unwrap();
    let u = &plateau.u;
    let reg = check_regularity(&suite.graph, u, 1e-9).unwrap();
    let at0 = reg.item("0").map(|i| i.residual).unwrap_or(f64::NAN);
    write_report(&reg, &mut artifact).unwrap();
    outcome(
        rejected.len() == 3 && (at0 - 1.0).abs() <= 1e-12 && suite.pass,
        format!("rejected {rejected:?}; plateau regularity residual at 0 = {at0:.12}"),
        artifact,
    )
}

fn c9_boundary_consistency() -> Outcome {
    let g = interval(200);
    let f = ScalarField::constant(&g, FieldRole::Rhs, 1.0);
    let left = g.vertex("-100").unwrap();
    let right = g.vertex("100").unwrap();
    let zeta = ScalarField::boundary_data(&g, [(left, 0.0), (right, 3.0)]);
    let p = DirichletProblem::new(&g, &f, &zeta);
    let vf = solve_dirichlet(&p).unwrap();
    let cert = check_boundary_consistency(&p, &vf).unwrap();
    let u1 = vf.value(right);
    let attained = vf.attained[right];
    let ok = (u1 - 2.0).abs() <= 1e-12
        && attained == Some(false)
        && (cert.lipschitz - 1.5).abs() <= 1e-12
        && cert.inf_f == 1.0
        && !cert.strong_condition;
    let artifact = serde_json::to_vec(&cert).unwrap();
    outcome(
        ok,
        format!(
            "u(1) = {u1}, attained {attained:?}, L = {} vs inf f = {}, strong condition {}",
            cert.lipschitz, cert.inf_f, cert.strong_condition
        ),
        artifact,
    )
}

fn cli(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_eikograph"))
        .args(args)
        .env_remove("EIKOGRAPH_SEED")
        .output()
        .unwrap()
        .status
        .code()
        .unwrap_or(-1)
}

fn cli_pipeline(dir: &std::path::Path) -> Vec<u8> {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    assert_eq!(cli(&["fixture", "--name", "interval", "--n", "200", "--out", &p("g.json")]), 0);
    assert_eq!(
        cli(&[
            "solve", "--graph", &p("g.json"), "--f", "const:1", "--zeta", "const:0", "--out", &p("u.csv"), "--plot",
            &p("plot.csv"), "--certificate", &p("cert.json"),
        ]),
        0
    );
    assert_eq!(
        cli(&[
            "suite", "--name", "gasket", "--level", "3", "--f", "const:1", "--levels", "3", "--report", &p("suite.csv"),
        ]),
        0
    );
    let mut bytes = Vec::new();
    for name in ["g.json", "u.csv", "plot.csv", "cert.json", "suite.csv"] {
        bytes.extend(std::fs::read(dir.join(name)).unwrap());
    }
    bytes
}

fn c10_determinism(first: &[Vec<u8>]) -> Outcome {
    let again = [
        c1_interval_exactness(),
        c2_counterexample_rejection(),
        c3_intrinsic_metric(),
        c4_oracle_equivalence(),
        c5_equivalence_suite(),
        c6_comparison(),
        c7_hamiltonian_reduction(),
        c8_counterexamples(),
        c9_boundary_consistency(),
    ];
    let differing: Vec<usize> = again
        .iter()
        .zip(first)
        .enumerate()
        .filter(|(_, (o, a))| o.artifact != **a)
        .map(|(i, _)| i + 1)
        .collect();
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let cli_same = cli_pipeline(d1.path()) == cli_pipeline(d2.path());
    let g = interval(200);
    let u = ScalarField::from_fn(&g, FieldRole::Solution, |v| 1.0 - xcoord(&g, v).abs());
    let (mut a, mut b) = (Vec::new(), Vec::new());
    write_plot_data(&g, &u, true, &mut a).unwrap();
    write_plot_data(&g, &u, true, &mut b).unwrap();
    outcome(
        differing.is_empty() && cli_same && a == b,
        format!("criteria with differing bytes {differing:?}; CLI pipeline identical {cli_same}"),
        Vec::new(),
    )
}

fn main() {
    let names = [
        "interval exactness",
        "counterexample rejection",
        "intrinsic metric",
        "oracle equivalence",
        "equivalence suite",
        "comparison principle",
        "hamiltonian reduction",
        "counterexamples reproduced",
        "boundary consistency",
        "determinism",
    ];
    let mut outcomes = vec![
        c1_interval_exactness(),
        c2_counterexample_rejection(),
        c3_intrinsic_metric(),
        c4_oracle_equivalence(),
        c5_equivalence_suite(),
        c6_comparison(),
        c7_hamiltonian_reduction(),
        c8_counterexamples(),
        c9_boundary_consistency(),
    ];
    let artifacts: Vec<Vec<u8>> = outcomes.iter().map(|o| o.artifact.clone()).collect();
    outcomes.push(c10_determinism(&artifacts));

    let mut failed = Vec::new();
    for (i, (name, o)) in names.iter().zip(&outcomes).enumerate() {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {} {name}: {verdict} {}", i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
