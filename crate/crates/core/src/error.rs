use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("graph is not connected: {0}")]
    Connectivity(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("field error: {0}")]
    Field(String),

    #[error("problem error: {0}")]
    Problem(String),

    #[error("graph error: {0}")]
    Graph(String),

    #[error("hamiltonian error: {0}")]
    Hamiltonian(String),

    #[error("coercivity error: no p <= {cap} with H > 0 at vertex {vertex} (rho = {rho})")]
    Coercivity { vertex: String, rho: f64, cap: f64 },

    #[error("no convergence after {iterations} iterations (last change {last_change:e})")]
    Convergence {
        iterations: usize,
        last_change: f64,
        history: Vec<f64>,
    },

    #[error("unknown vertex id {0:?}")]
    UnknownVertex(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
