//! Constant contraction metrics and their sampled verification.
//!
//! With a constant metric `P` the Lie derivative along `f` reduces to
//! `P·∂f/∂x + (∂f/∂x)ᵀ·P`, so the differential Riccati-type inequality can be
//! checked pointwise from the drift Jacobian.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::models::AgentModel;
use crate::numerics::{sym_eig, Matrix};

/// A constant metric `P` with rate constants.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricCertificate {
    pub p: Matrix,
    pub rho: f64,
    /// Contraction rate.
    pub mu: f64,
    /// `λ_min(P)`.
    pub p_lower: f64,
    /// `λ_max(P)`.
    pub p_upper: f64,
    /// Set when the certificate was derived from an approximation of the
    /// dynamics and is only expected to hold locally.
    pub approximate: bool,
}

impl MetricCertificate {
    /// Validates `P` (symmetric positive definite), `ρ ≥ 0`, `μ > 0`.
    pub fn new(p: Matrix, rho: f64, mu: f64) -> Result<Self> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::InvalidArgument(format!("rho = {rho} must be nonnegative")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("mu = {mu} must be positive")));
        }
        let eig = sym_eig(&p)?;
        if eig.min() <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: eig.min(),
            });
        }
        let p = p.symmetric_part();
        Ok(Self {
            p,
            rho,
            mu,
            p_lower: eig.min(),
            p_upper: eig.max(),
            approximate: false,
        })
    }

    pub fn mark_approximate(mut self) -> Self {
        self.approximate = true;
        self
    }

    pub fn dim(&self) -> usize {
        self.p.rows()
    }

    /// `λ_min(−[P·J + JᵀP − ρ·P g gᵀ P + 2μP])` for one Jacobian and input vector.
    pub fn ari_margin(&self, jacobian: &Matrix, g: &[f64]) -> Result<f64> {
        let p = &self.p;
        let pj = p * jacobian;
        let pg = p.matvec(g);
        let n = self.dim();
        let lhs = Matrix::from_fn(n, n, |i, j| {
            pj[(i, j)] + pj[(j, i)] - self.rho * pg[i] * pg[j] + 2.0 * self.mu * p[(i, j)]
        });
        Ok(sym_eig(&lhs.scale(-1.0))?.min())
    }
}

fn check_dims(cert: &MetricCertificate, model: &dyn AgentModel) -> Result<()> {
    if cert.dim() != model.state_dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} metric for a {}-dimensional model",
            cert.dim(),
            cert.dim(),
            model.state_dim()
        )));
    }
    Ok(())
}

/// Worst ARI margin over the samples; nonnegative means the inequality holds
/// at every sample.
pub fn verify_ari_sampled(
    cert: &MetricCertificate,
    model: &dyn AgentModel,
    samples: &[Vec<f64>],
) -> Result<f64> {
    check_dims(cert, model)?;
    let mut worst = f64::INFINITY;
    for x in samples {
        let margin = cert.ari_margin(&model.drift_jacobian(x), &model.g(x))?;
        worst = worst.min(margin);
    }
    Ok(worst)
}

/// Residuals of the Killing and integrability conditions over the samples.
///
/// Killing: `‖P·∂g/∂x + (∂g/∂x)ᵀP‖_max` (the directional derivative of a
/// constant `P` vanishes). Integrability: `‖∇α(x) − g(x)ᵀP‖_max` with `∇α`
/// from central differences of step `fd_step`.
pub fn verify_killing_integrability(
    cert: &MetricCertificate,
    model: &dyn AgentModel,
    samples: &[Vec<f64>],
    fd_step: f64,
) -> Result<(f64, f64)> {
    check_dims(cert, model)?;
    if !(fd_step > 0.0) {
        return Err(Error::InvalidArgument(format!("fd_step = {fd_step} must be positive")));
    }
    let n = cert.dim();
    let mut killing: f64 = 0.0;
    let mut integrability: f64 = 0.0;
    for x in samples {
        let pdg = &cert.p * &model.input_jacobian(x);
        for i in 0..n {
            for j in 0..n {
                killing = killing.max((pdg[(i, j)] + pdg[(j, i)]).abs());
            }
        }
        let target = cert.p.transpose().matvec(&model.g(x));
        let mut probe = x.clone();
        for (i, &t) in target.iter().enumerate() {
            let orig = probe[i];
            probe[i] = orig + fd_step;
            let up = model.feedback(&probe);
            probe[i] = orig - fd_step;
            let down = model.feedback(&probe);
            probe[i] = orig;
            let grad = (up - down) / (2.0 * fd_step);
            integrability = integrability.max((grad - t).abs());
        }
    }
    Ok((killing, integrability))
}

/// Default finite-difference step for the integrability check.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// `count` points drawn uniformly from the ball of `radius` around `center`.
pub fn sample_ball(center: &[f64], radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| point_in_ball(&mut rng, center, radius)).collect()
}

pub(crate) fn point_in_ball(rng: &mut impl Rng, center: &[f64], radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = center.iter().map(|_| rng.random_range(-1.0..=1.0)).collect();
        if v.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            return center.iter().zip(v).map(|(c, d)| c + radius * d).collect();
        }
    }
}
