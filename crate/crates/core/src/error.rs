use thiserror::Error;

/// Errors raised anywhere in the synchronization toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e})")]
    NonSymmetric { asymmetry: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("singular system (pivot {pivot:.3e})")]
    Singular { pivot: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.6e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph has no edges")]
    NoEdges,

    #[error("graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },

    #[error("no Finsler multiplier found (best margin {best_margin:.3e} at mu = {best_mu:.3e})")]
    MuSearchFailed { best_mu: f64, best_margin: f64 },

    #[error("pair (A, B) is not stabilizable: {0}")]
    NotStabilizable(String),

    #[error("simulation diverged at t = {time}")]
    Diverged { time: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("window [{start}, {end}] holds fewer than two samples")]
    EmptyWindow { start: f64, end: f64 },

    #[error("channel {0} was not recorded")]
    MissingChannel(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
