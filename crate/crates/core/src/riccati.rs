//! Linear agents: Riccati-based contraction certificates.
//!
//! For `ẋ = Ax + Bu` a constant metric satisfies
//! `PA + AᵀP − ρPBBᵀP ⪯ −2μP`. We solve the shifted equality
//! `(A+μI)ᵀP + P(A+μI) − ρPBBᵀP + I = 0` by Newton–Kleinman iteration, which
//! gives the inequality with unit slack, and return `K = BᵀP`.

use crate::error::{Error, Result};
use crate::metric::MetricCertificate;
use crate::numerics::{inverse, is_hurwitz, lyapunov_solve, sym_eig, unit_floor, Matrix};

pub const MAX_NEWTON_STEPS: usize = 100;
pub const NEWTON_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LinearDesign {
    pub a: Matrix,
    pub b: Matrix,
    pub rho: f64,
    pub mu_target: f64,
    pub certificate: MetricCertificate,
    /// `BᵀP`, `m×n`.
    pub gain: Matrix,
    /// Newton iterates `P₁, P₂, …`, last one equal to `certificate.p`.
    pub iterates: Vec<Matrix>,
}

impl LinearDesign {
    /// `PA + AᵀP − ρPBBᵀP + 2μP`; negative semidefinite for a valid design.
    pub fn ari_lhs(&self) -> Matrix {
        let p = &self.certificate.p;
        let pa = p * &self.a;
        let pb = p * &self.b;
        &(&(&pa + &pa.transpose()) - &(&pb * &pb.transpose()).scale(self.rho)) + &p.scale(2.0 * self.mu_target)
    }

    /// `λ_min(−(PA + AᵀP − ρPBBᵀP + 2μP))`.
    pub fn ari_margin(&self) -> Result<f64> {
        Ok(sym_eig(&self.ari_lhs().scale(-1.0))?.min())
    }
}

fn check_pair(a: &Matrix, b: &Matrix) -> Result<()> {
    if !a.is_square() || b.rows() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

/// Stabilizing gain by Bass's method.
///
/// With `λ = ‖A‖_F + 1`, solve `(−A − λI)Z + Z(−A − λI)ᵀ = −2BBᵀ` and take
/// `K₀ = BᵀZ⁻¹`. If `Z` is singular (an uncontrollable mode), the right-hand
/// side is regularized with a small multiple of the identity; in every case
/// `A − BK₀` is verified Hurwitz before returning.
pub fn bass_initial_gain(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    check_pair(a, b)?;
    let n = a.rows();
    let lambda = a.frobenius() + 1.0;
    // lyapunov_solve(X, Q) solves XᵀZ + ZX + Q = 0; X = (−A − λI)ᵀ.
    let shifted = (&a.scale(-1.0) - &Matrix::identity(n).scale(lambda)).transpose();
    let bbt = b * &b.transpose();

    let z_for = |q: &Matrix| -> Result<Option<Matrix>> {
        let z = lyapunov_solve(&shifted, &q.scale(2.0))?;
        let eig = sym_eig(&z)?;
        Ok((eig.min() > 1e-12 * eig.max().max(f64::MIN_POSITIVE)).then_some(z))
    };

    let z = match z_for(&bbt)? {
        Some(z) => z,
        None => {
            let eps = 1e-6 * unit_floor(bbt.max_abs());
            z_for(&(&bbt + &Matrix::identity(n).scale(eps)))?
                .ok_or_else(|| Error::NotStabilizable("Bass Gramian is singular".into()))?
        }
    };
    let k0 = &b.transpose() * &inverse(&z).map_err(|_| {
        Error::NotStabilizable("Bass Gramian is not invertible".into())
    })?;
    if !is_hurwitz(&(a - &(b * &k0)))? {
        return Err(Error::NotStabilizable(
            "initial closed loop A − BK₀ is not Hurwitz".into(),
        ));
    }
    Ok(k0)
}

/// Solves the shifted Riccati equation for the pair `(A, B)` with input
/// weighting `ρ` and target contraction rate `μ`.
pub fn solve_ari(a: &Matrix, b: &Matrix, rho: f64, mu: f64) -> Result<LinearDesign> {
    check_pair(a, b)?;
    if !(rho > 0.0 && mu > 0.0 && rho.is_finite() && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("need rho > 0 and mu > 0, got {rho}, {mu}")));
    }
    let n = a.rows();
    let a_mu = a + &Matrix::identity(n).scale(mu);
    let b_s = b.scale(rho.sqrt());
    let mut k = bass_initial_gain(&a_mu, &b_s)?;

    let mut iterates: Vec<Matrix> = Vec::new();
    let mut converged = false;
    for _ in 0..MAX_NEWTON_STEPS {
        let closed = &a_mu - &(&b_s * &k);
        let q = &Matrix::identity(n) + &(&k.transpose() * &k);
        let p = lyapunov_solve(&closed, &q).map_err(|e| match e {
            Error::Singular { .. } => {
                Error::NotStabilizable("Newton step closed loop lost stability".into())
            }
            other => other,
        })?;
        k = &b_s.transpose() * &p;
        let change = iterates.last().map(|prev| (&p - prev).max_abs());
        iterates.push(p);
        if let Some(change) = change {
            if change <= NEWTON_TOL * unit_floor(iterates.last().unwrap().max_abs()) {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "Newton–Kleinman",
            iterations: MAX_NEWTON_STEPS,
        });
    }
    let p = iterates.last().unwrap().clone();
    let certificate = MetricCertificate::new(p.clone(), rho, mu)?;
    let gain = &b.transpose() * &p;
    Ok(LinearDesign {
        a: a.clone(),
        b: b.clone(),
        rho,
        mu_target: mu,
        certificate,
        gain,
        iterates,
    })
}
