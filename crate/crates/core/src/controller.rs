//! Distributed diffusive coupling `uᵢ = β Σ_{j∈𝒩ᵢ} a_ij (α(x_j) − α(xᵢ))`
//! and the critical gain `β* = ρ·w̄ / (2λ̲)`.

use crate::error::{Error, Result};
use crate::graph::{GraphMatrices, WeightedGraph};
use crate::models::AgentModel;
use crate::numerics::min_real_eigenvalue;
use crate::upsilon::{weighted_margin, UpsilonResult};

/// Critical gain `ρ·w̄ / (2λ̲)` with `w̄ = max wᵢ` and
/// `λ̲ = λ_min((WΥ + ΥᵀW)/2)`.
pub fn beta_star(m: &GraphMatrices, u: &UpsilonResult, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidArgument(format!("rho = {rho} must be positive")));
    }
    let lambda = weighted_margin(&m.w, &u.upsilon)?;
    if lambda <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: lambda,
        });
    }
    Ok(rho * m.max_weight() / (2.0 * lambda))
}

/// Both readings of the minimal eigenvalue entering `β*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainDiagnostics {
    pub w_max: f64,
    /// `λ_min((WΥ + ΥᵀW)/2)`, the value used for `β*`.
    pub lambda_min_sym: f64,
    /// Smallest real part over the eigenvalues of `WΥ` itself.
    pub lambda_min_wu_real: f64,
    pub beta_star: f64,
}

pub fn gain_diagnostics(m: &GraphMatrices, u: &UpsilonResult, rho: f64) -> Result<GainDiagnostics> {
    let beta_star = beta_star(m, u, rho)?;
    Ok(GainDiagnostics {
        w_max: m.max_weight(),
        lambda_min_sym: weighted_margin(&m.w, &u.upsilon)?,
        lambda_min_wu_real: min_real_eigenvalue(&(&m.w * &u.upsilon))?,
        beta_star,
    })
}

/// Gain settings for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    pub beta: f64,
    pub beta_star: f64,
}

impl ControllerConfig {
    pub fn new(beta: f64, beta_star: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta = {beta} must be nonnegative")));
        }
        Ok(Self { beta, beta_star })
    }

    /// `β = multiplier·β*`.
    pub fn from_multiplier(multiplier: f64, beta_star: f64) -> Result<Self> {
        Self::new(multiplier * beta_star, beta_star)
    }

    /// Set when `β < β*`, where convergence is no longer guaranteed.
    pub fn below_critical(&self) -> bool {
        self.beta < self.beta_star
    }
}

fn check_states(states: &[f64], g: &WeightedGraph, model: &dyn AgentModel) -> Result<usize> {
    let n = model.state_dim();
    if states.len() != g.node_count() * n {
        return Err(Error::DimensionMismatch(format!(
            "{} state entries for {} agents of dimension {n}",
            states.len(),
            g.node_count()
        )));
    }
    Ok(n)
}

/// Per-agent inputs for stacked states (agent-major), neighbour-sum form.
pub fn coupling_inputs(
    states: &[f64],
    g: &WeightedGraph,
    model: &dyn AgentModel,
    beta: f64,
) -> Result<Vec<f64>> {
    let n = check_states(states, g, model)?;
    let mut u = vec![0.0; g.node_count()];
    coupling_inputs_into(states, n, g, model, beta, &mut u);
    Ok(u)
}

/// Unchecked kernel behind [`coupling_inputs`]; `u` is overwritten.
pub(crate) fn coupling_inputs_into(
    states: &[f64],
    n: usize,
    g: &WeightedGraph,
    model: &dyn AgentModel,
    beta: f64,
    u: &mut [f64],
) {
    let alpha: Vec<f64> = states.chunks_exact(n).map(|x| model.feedback(x)).collect();
    u.iter_mut().for_each(|v| *v = 0.0);
    for e in g.edges() {
        u[e.k] += e.weight * (alpha[e.l] - alpha[e.k]);
        u[e.l] += e.weight * (alpha[e.k] - alpha[e.l]);
    }
    for v in u.iter_mut() {
        *v *= beta;
    }
}

/// `u = −β L α(x)`; the Laplacian form of the same feedback.
pub fn coupling_inputs_laplacian(
    states: &[f64],
    m: &GraphMatrices,
    model: &dyn AgentModel,
    beta: f64,
) -> Result<Vec<f64>> {
    let n = model.state_dim();
    if states.len() != m.node_count() * n {
        return Err(Error::DimensionMismatch("stacked state length".into()));
    }
    let alpha: Vec<f64> = states.chunks_exact(n).map(|x| model.feedback(x)).collect();
    Ok(m.l.matvec(&alpha).into_iter().map(|v| -beta * v).collect())
}
