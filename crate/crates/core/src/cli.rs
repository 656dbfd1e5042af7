//! Command-line front end. [`run`] maps argv to an exit code: 0 on success
//! or a passing check, 1 on a failing check, 2 on input errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fields::{FieldExpr, FieldRole, ScalarField, DEFAULT_POSITIVITY_THRESHOLD};
use crate::hamiltonian::{solve_general, validate_hamiltonian, GeneralOptions, HamiltonianSpec};
use crate::io::{
    read_chord_input, read_field, read_graph, write_field, write_graph, write_plot_data, write_report,
    write_solution, write_suite_report,
};
use crate::metric::{induce_intrinsic, refine, InduceOptions, MetricGraph};
use crate::slope::{
    check_c_subsolution, check_c_supersolution, check_monge, check_regularity, default_tolerance, CheckReport,
    MongeMode, BASE_TOL,
};
use crate::solver::{check_boundary_consistency, solve_dirichlet, DirichletProblem};
use crate::verify::{compare, default_band, equivalence_suite, fixture, ComparisonInstance, ComparisonVerdict, FixtureKind};

pub const SEED_ENV: &str = "EIKOGRAPH_SEED";

#[derive(Debug, Parser)]
#[command(name = "eikograph", version, about = "Eikonal equations on metric graphs")]
struct Cli {
    /// JSON file overriding default tolerances and seed.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve |∇u| = f with Dirichlet data.
    Solve(SolveArgs),
    /// Solve H(x, u, |∇u|) = 0 with Dirichlet data.
    SolveH(SolveHArgs),
    /// Check a field against one solution notion.
    Check(CheckArgs),
    /// Comparison principle for a sub/supersolution pair.
    Compare(CompareArgs),
    /// Run the equivalence suite on a fixture.
    Suite(SuiteArgs),
    /// Build a graph from chord distances.
    InduceMetric(InduceArgs),
    /// Subdivide edges to a maximal length.
    Refine(RefineArgs),
    /// Write a canonical fixture graph.
    Fixture(FixtureArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    graph: PathBuf,
    /// CSV file or inline `const:c` / `linear:a,b[,axis]`.
    #[arg(long)]
    f: String,
    #[arg(long)]
    zeta: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    threshold: Option<f64>,
    /// Write plot data CSV.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Require coordinates in the plot data.
    #[arg(long)]
    layout: bool,
    /// Write the boundary-consistency certificate as JSON.
    #[arg(long)]
    certificate: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveHArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Builtin name (linear, quadratic, affine-rho, ex1, ex2, plateau; with
    /// optional `:c`) or `expr:<expression in p, rho, x, y>`.
    #[arg(long)]
    hamiltonian: String,
    #[arg(long)]
    zeta: String,
    #[arg(long)]
    out: PathBuf,
    /// Picard tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    bisection_tol: Option<f64>,
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    layout: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CheckKind {
    Monge,
    Csub,
    Csuper,
    Regularity,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(value_enum)]
    kind: CheckKind,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    u: PathBuf,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// Monge mode: full, sub or super.
    #[arg(long, default_value = "full")]
    mode: String,
    /// Report CSV path (stdout when absent).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    f: String,
    #[arg(long)]
    u: PathBuf,
    #[arg(long)]
    v: PathBuf,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    band: Option<f64>,
}

#[derive(Debug, Args)]
struct FixtureSelect {
    /// interval, circle, grid, binary-tree or gasket.
    #[arg(long = "name", alias = "fixture")]
    name: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    level: Option<u32>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = 4)]
    connectivity: u8,
}

impl FixtureSelect {
    fn kind(&self) -> Result<FixtureKind> {
        let need = |x: Option<usize>, flag: &str| {
            x.ok_or_else(|| Error::Parse(format!("fixture {} needs --{flag}", self.name)))
        };
        match self.name.as_str() {
            "interval" => Ok(FixtureKind::Interval { n: need(self.n, "n")? }),
            "circle" => Ok(FixtureKind::Circle { n: need(self.n, "n")? }),
            "grid" => Ok(FixtureKind::Grid {
                n: need(self.n, "n")?,
                connectivity: self.connectivity,
            }),
            "binary-tree" | "binary_tree" => Ok(FixtureKind::BinaryTree {
                depth: need(self.depth.or(self.n), "depth")?,
            }),
            "gasket" => Ok(FixtureKind::Gasket {
                level: need(self.level.map(|l| l as usize).or(self.n), "level")? as u32,
            }),
            other => Err(Error::Parse(format!("unknown fixture {other:?}"))),
        }
    }
}

#[derive(Debug, Args)]
struct SuiteArgs {
    #[command(flatten)]
    fixture: FixtureSelect,
    #[arg(long, default_value = "const:1")]
    f: String,
    #[arg(long, default_value = "const:0")]
    zeta: String,
    /// Number of refinement levels (h, h/2, ...).
    #[arg(long, default_value_t = 3)]
    levels: usize,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InduceArgs {
    /// JSON with points, adjacency and optional distance table.
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    samples: Option<usize>,
    /// Write the probe report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RefineArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    h_max: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FixtureArgs {
    #[command(flatten)]
    fixture: FixtureSelect,
    #[arg(long)]
    out: PathBuf,
}

/// Values overridable through `--config`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    threshold: Option<f64>,
    check_tol: Option<f64>,
    bisection_tol: Option<f64>,
    picard_tol: Option<f64>,
    max_iter: Option<usize>,
    seed: Option<u64>,
    samples: Option<usize>,
}

/// Resolved tolerances, seed and paths for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub threshold: f64,
    /// `None` means the per-check default.
    pub check_tol: Option<f64>,
    pub bisection_tol: f64,
    pub picard_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub samples: usize,
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("threshold", self.threshold),
            ("bisection_tol", self.bisection_tol),
            ("picard_tol", self.picard_tol),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::Validation(format!("{name} must be positive, got {x}")));
            }
        }
        if let Some(t) = self.check_tol {
            if !(t >= 0.0) {
                return Err(Error::Validation(format!("check tolerance must be >= 0, got {t}")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::Validation("max_iter must be positive".into()));
        }
        for out in &self.outputs {
            if self.inputs.iter().any(|i| same_path(i, out)) {
                return Err(Error::Validation(format!(
                    "output {} would overwrite an input",
                    out.display()
                )));
            }
        }
        Ok(())
    }
}

fn same_path(a: &Path, b: &Path) -> bool {
    match (fs::canonicalize(a), fs::canonicalize(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

fn seed_from_env(default: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{SEED_ENV}={s:?} is not an integer"))),
        Err(_) => Ok(default),
    }
}

enum Outcome {
    Success,
    CheckFailed,
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::CheckFailed) => 1,
        Err(e) => {
            eprintln!("eikograph: {e}");
            2
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))
        }
        None => Ok(ConfigFile::default()),
    }
}

fn field_arg(arg: &str, g: &MetricGraph, role: FieldRole) -> Result<ScalarField> {
    if arg.starts_with("const:") || arg.starts_with("linear:") {
        arg.parse::<FieldExpr>()?.evaluate(g, role)
    } else {
        read_field(Path::new(arg), g, role)
    }
}

fn file_args(args: &[&str]) -> Vec<PathBuf> {
    args.iter()
        .filter(|a| !(a.starts_with("const:") || a.starts_with("linear:")))
        .map(PathBuf::from)
        .collect()
}

fn execute(cli: Cli) -> Result<Outcome> {
    let file = load_config(cli.config.as_deref())?;
    let base = |command: &str, inputs: Vec<PathBuf>, outputs: Vec<PathBuf>| -> Result<RunConfig> {
        let cfg = RunConfig {
            command: command.to_string(),
            inputs,
            outputs,
            threshold: file.threshold.unwrap_or(DEFAULT_POSITIVITY_THRESHOLD),
            check_tol: file.check_tol,
            bisection_tol: file.bisection_tol.unwrap_or(1e-9),
            picard_tol: file.picard_tol.unwrap_or(crate::hamiltonian::DEFAULT_PICARD_TOL),
            max_iter: file.max_iter.unwrap_or(crate::hamiltonian::DEFAULT_PICARD_MAX_ITER),
            seed: seed_from_env(file.seed.unwrap_or(crate::DEFAULT_SEED))?,
            samples: file.samples.unwrap_or(InduceOptions::default().samples),
        };
        Ok(cfg)
    };

    match cli.command {
        Command::Solve(a) => {
            let mut inputs = vec![a.graph.clone()];
            inputs.extend(file_args(&[&a.f, &a.zeta]));
            let mut outputs = vec![a.out.clone()];
            outputs.extend(a.plot.clone());
            outputs.extend(a.certificate.clone());
            let mut cfg = base("solve", inputs, outputs)?;
            if let Some(t) = a.threshold {
                cfg.threshold = t;
            }
            cfg.validate()?;
            let g = read_graph(&a.graph)?;
            let f = field_arg(&a.f, &g, FieldRole::Rhs)?;
            let zeta = field_arg(&a.zeta, &g, FieldRole::BoundaryData)?;
            let problem = DirichletProblem::new(&g, &f, &zeta).with_threshold(cfg.threshold);
            let vf = solve_dirichlet(&problem)?;
            write_solution(&g, &vf, &a.out)?;
            if let Some(p) = &a.plot {
                write_plot_data(&g, &vf.u, a.layout, fs::File::create(p)?)?;
            }
            if let Some(p) = &a.certificate {
                let cert = check_boundary_consistency(&problem, &vf)?;
                fs::write(p, serde_json::to_string_pretty(&cert)? + "\n")?;
            }
            Ok(Outcome::Success)
        }
        Command::SolveH(a) => {
            let mut inputs = vec![a.graph.clone()];
            inputs.extend(file_args(&[&a.zeta]));
            let mut outputs = vec![a.out.clone()];
            outputs.extend(a.plot.clone());
            let mut cfg = base("solve-h", inputs, outputs)?;
            if let Some(t) = a.tol {
                cfg.picard_tol = t;
            }
            if let Some(m) = a.max_iter {
                cfg.max_iter = m;
            }
            if let Some(t) = a.bisection_tol {
                cfg.bisection_tol = t;
            }
            cfg.validate()?;
            let g = read_graph(&a.graph)?;
            let h: HamiltonianSpec = a.hamiltonian.parse()?;
            let zeta = field_arg(&a.zeta, &g, FieldRole::BoundaryData)?;
            zeta.check_domain(&g)?;
            let range = (zeta.min() - 1.0, zeta.max() + 1.0);
            let report = validate_hamiltonian(&h, &g, range, 8)?;
            if !report.pass {
                let why = report
                    .counterexample
                    .map(|c| c.to_string())
                    .unwrap_or_else(|| "structural conditions fail".into());
                return Err(Error::Hamiltonian(format!("{} rejected: {why}", h.name)));
            }
            let opts = GeneralOptions {
                bisection_tol: cfg.bisection_tol,
                tol: cfg.picard_tol,
                max_iter: cfg.max_iter,
                threshold: 0.0,
            };
            let sol = solve_general(&g, &h, &zeta, opts)?;
            write_solution(&g, &sol.value, &a.out)?;
            if let Some(p) = &a.plot {
                write_plot_data(&g, &sol.value.u, a.layout, fs::File::create(p)?)?;
            }
            eprintln!(
                "solve-h: {} iteration(s), monge residual {} ({})",
                sol.iterations,
                sol.monge.max_residual(),
                if sol.monge.pass { "pass" } else { "fail" }
            );
            Ok(Outcome::Success)
        }
        Command::Check(a) => {
            let mut inputs = vec![a.graph.clone(), a.u.clone()];
            if let Some(f) = &a.f {
                inputs.extend(file_args(&[f]));
            }
            let mut cfg = base("check", inputs, a.report.iter().cloned().collect())?;
            if a.tol.is_some() {
                cfg.check_tol = a.tol;
            }
            cfg.validate()?;
            let g = read_graph(&a.graph)?;
            let u = read_field(&a.u, &g, FieldRole::Solution)?;
            let f = a
                .f
                .as_deref()
                .map(|s| field_arg(s, &g, FieldRole::Rhs))
                .transpose()?;
            let need_f = || f.as_ref().ok_or_else(|| Error::Parse("this check needs --f".into()));
            let default_tol = match &f {
                Some(f) => default_tolerance(&g, f)?,
                None => BASE_TOL,
            };
            let report = match a.kind {
                CheckKind::Monge => {
                    let mode: MongeMode = a.mode.parse()?;
                    check_monge(&g, &u, need_f()?, cfg.check_tol.unwrap_or(default_tol), mode)?
                }
                CheckKind::Csub => check_c_subsolution(&g, &u, need_f()?, cfg.check_tol.unwrap_or(0.0))?,
                CheckKind::Csuper => check_c_supersolution(&g, &u, need_f()?, cfg.check_tol.unwrap_or(default_tol))?,
                CheckKind::Regularity => check_regularity(&g, &u, cfg.check_tol.unwrap_or(default_tol))?,
            };
            emit_report(&report, a.report.as_deref())?;
            Ok(if report.pass { Outcome::Success } else { Outcome::CheckFailed })
        }
        Command::Compare(a) => {
            let mut inputs = vec![a.graph.clone(), a.u.clone(), a.v.clone()];
            inputs.extend(file_args(&[&a.f]));
            let mut cfg = base("compare", inputs, vec![])?;
            if a.tol.is_some() {
                cfg.check_tol = a.tol;
            }
            cfg.validate()?;
            let g = read_graph(&a.graph)?;
            let f = field_arg(&a.f, &g, FieldRole::Rhs)?;
            let u = read_field(&a.u, &g, FieldRole::Solution)?;
            let v = read_field(&a.v, &g, FieldRole::Solution)?;
            let mut inst = ComparisonInstance::new(&g, &f, &u, &v);
            inst.band = a.band.unwrap_or_else(|| default_band(&g));
            if let Some(t) = cfg.check_tol {
                inst.tol = t;
            }
            let report = compare(&inst)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(match report.verdict {
                ComparisonVerdict::Pass => Outcome::Success,
                _ => Outcome::CheckFailed,
            })
        }
        Command::Suite(a) => {
            let cfg = base("suite", file_args(&[&a.f, &a.zeta]), a.report.iter().cloned().collect())?;
            cfg.validate()?;
            let fix = fixture(a.fixture.kind()?)?;
            let f = field_arg(&a.f, &fix.graph, FieldRole::Rhs)?;
            let zeta = field_arg(&a.zeta, &fix.graph, FieldRole::BoundaryData)?;
            let report = equivalence_suite(&fix, &f, &zeta, a.levels)?;
            match &a.report {
                Some(p) => write_suite_report(&report, fs::File::create(p)?)?,
                None => write_suite_report(&report, io::stdout().lock())?,
            }
            Ok(if report.pass { Outcome::Success } else { Outcome::CheckFailed })
        }
        Command::InduceMetric(a) => {
            let mut outputs = vec![a.out.clone()];
            outputs.extend(a.report.clone());
            let mut cfg = base("induce-metric", vec![a.points.clone()], outputs)?;
            if let Some(s) = a.samples {
                cfg.samples = s;
            }
            cfg.validate()?;
            let input = read_chord_input(&a.points)?;
            let (g, report) = induce_intrinsic(
                &input,
                InduceOptions {
                    samples: cfg.samples,
                    seed: cfg.seed,
                },
            )?;
            write_graph(&g, &a.out)?;
            if let Some(p) = &a.report {
                fs::write(p, serde_json::to_string_pretty(&report)? + "\n")?;
            }
            Ok(Outcome::Success)
        }
        Command::Refine(a) => {
            let cfg = base("refine", vec![a.graph.clone()], vec![a.out.clone()])?;
            cfg.validate()?;
            if !(a.h_max > 0.0) {
                return Err(Error::Validation(format!("--h-max must be positive, got {}", a.h_max)));
            }
            let g = read_graph(&a.graph)?;
            write_graph(&refine(&g, a.h_max), &a.out)?;
            Ok(Outcome::Success)
        }
        Command::Fixture(a) => {
            let cfg = base("fixture", vec![], vec![a.out.clone()])?;
            cfg.validate()?;
            let fix = fixture(a.fixture.kind()?)?;
            write_graph(&fix.graph, &a.out)?;
            Ok(Outcome::Success)
        }
    }
}

fn emit_report(report: &CheckReport, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => write_report(report, fs::File::create(p)?)?,
        None => write_report(report, io::stdout().lock())?,
    }
    let mut err = io::stderr().lock();
    match &report.worst {
        Some(w) => writeln!(
            err,
            "{}: {} (worst {:?}, residual {}, tol {})",
            report.check,
            if report.pass { "pass" } else { "fail" },
            w.id,
            w.residual,
            report.tolerance
        )?,
        None => writeln!(err, "{}: pass (no items)", report.check)?,
    }
    Ok(())
}

/// Writes a field CSV; used by tests and the Python bindings.
pub fn save_field(g: &MetricGraph, field: &ScalarField, path: &Path) -> Result<()> {
    write_field(g, field, path)
}
