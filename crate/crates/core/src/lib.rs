//! Eikonal equations `|∇u| = f` and `H(x, u, |∇u|) = 0` on finite metric
//! graphs: value-formula solver, discrete checks for the Monge, curve and
//! regularity solution notions, Hamiltonian reduction and a comparison
//! harness.

pub mod cli;
pub mod error;
pub mod fields;
pub mod hamiltonian;
pub mod io;
pub mod metric;
pub mod slope;
pub mod solver;
pub mod verify;

/// Seed for every randomized sampler unless overridden (`EIKOGRAPH_SEED`).
pub const DEFAULT_SEED: u64 = 0x5EED_2024;

pub use error::{Error, Result};
pub use fields::{FieldRole, ScalarField};
pub use hamiltonian::{reduce_h, solve_general, validate_hamiltonian, HamiltonianSpec};
pub use metric::{build_graph, intrinsic_distance, refine, GraphSpec, MetricGraph};
pub use slope::{check_c_subsolution, check_c_supersolution, check_monge, check_regularity, CheckReport, MongeMode};
pub use solver::{solve_dirichlet, DirichletProblem, ValueFunction};
pub use verify::{compare, fixture, ComparisonInstance, ComparisonVerdict, FixtureKind};
