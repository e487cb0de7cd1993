//! Distributed synchronization of nonlinear agents over weighted undirected
//! graphs: graph matrices, the edge-space matrix Υ, constant contraction
//! metrics, distributed diffusive controllers, simulation and analysis.

pub mod analysis;
pub mod controller;
pub mod error;
pub mod graph;
pub mod metric;
pub mod models;
pub mod numerics;
pub mod riccati;
pub mod simulator;
pub mod upsilon;

pub use analysis::{
    check_monotone, edge_energy, fit_decay_rate, sync_error, Channel, DecayFit, MonotoneCheck,
    SyncMetrics,
};
pub use controller::{beta_star, coupling_inputs, gain_diagnostics, ControllerConfig, GainDiagnostics};
pub use error::{Error, Result};
pub use graph::{build_matrices, Edge, GraphMatrices, WeightedGraph};
pub use metric::MetricCertificate;
pub use models::{AgentModel, Feedback, LinearAgent, LorenzAgent, LorenzParams, TanhAgent};
pub use numerics::Matrix;
pub use riccati::{solve_ari, LinearDesign};
pub use simulator::{simulate, Monitors, NetworkState, SimConfig, Trajectory};
pub use upsilon::{build_upsilon, UpsilonResult};
