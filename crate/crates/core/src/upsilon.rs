//! Construction of the edge-coupling matrix `Υ` with
//! `Υ Eᵀ = Eᵀ L` and `WΥ + ΥᵀW ≻ 0`, together with the offset matrix `Ω`
//! relating the per-edge inputs to the endpoint agents' inputs.
//!
//! `Υ = EᵀEW + μ Σᵢ vᵢvᵢᵀ` where `{vᵢ}` is an orthonormal basis of
//! `ker(E)`. Since every `vᵢ` annihilates `E`, the identity `ΥEᵀ = EᵀL` holds
//! for any `μ`; the scalar only has to make the weighted symmetric part
//! positive definite.

use crate::error::{Error, Result};
use crate::graph::GraphMatrices;
use crate::numerics::{nullspace_sym_psd, sym_eig, unit_floor, Matrix, DEFAULT_NULL_TOL};

/// Number of ladder steps tried in each direction of the `μ` search.
pub const MU_LADDER_STEPS: usize = 40;

#[derive(Debug, Clone)]
pub struct UpsilonResult {
    pub upsilon: Matrix,
    pub mu: f64,
    /// `½(|Eᵀ|L − Υ|Eᵀ|)`, `Q×N`.
    pub omega: Matrix,
    /// `λ_min((WΥ + ΥᵀW)/2)`.
    pub pd_margin: f64,
    /// Dimension `ℓ` of `ker(E)`.
    pub kernel_dim: usize,
    /// Orthonormal basis of `ker(E)`, `Q×ℓ`; `None` when `ℓ = 0`.
    pub kernel_basis: Option<Matrix>,
}

impl UpsilonResult {
    /// `EᵀEW + μ V Vᵀ` from the stored basis.
    pub fn reconstruct(&self, m: &GraphMatrices) -> Matrix {
        upsilon_for(m, self.kernel_basis.as_ref(), self.mu)
    }

    /// Max-norm of `ΥEᵀ − EᵀL`.
    pub fn identity_residual(&self, m: &GraphMatrices) -> f64 {
        let et = m.e.transpose();
        (&(&self.upsilon * &et) - &(&et * &m.l)).max_abs()
    }
}

fn upsilon_for(m: &GraphMatrices, basis: Option<&Matrix>, mu: f64) -> Matrix {
    match basis {
        Some(v) if mu != 0.0 => &m.l_e + &(&v.scale(mu) * &v.transpose()),
        _ => m.l_e.clone(),
    }
}

/// `λ_min((WΥ + ΥᵀW)/2)`.
pub fn weighted_margin(w: &Matrix, upsilon: &Matrix) -> Result<f64> {
    let wu = w * upsilon;
    Ok(sym_eig(&wu.symmetric_part())?.min())
}

/// Builds `Υ`, picks `μ`, and verifies both defining properties.
///
/// When `ker(E)` is trivial (forests), `Υ = L_e` and `μ = 0`. Otherwise the
/// search starts at the smallest nonzero Laplacian eigenvalue and walks the
/// ladder `μ₀·2^{±j}` in whichever direction improves the margin. The margin
/// is the smallest eigenvalue of an affine matrix pencil in `μ`, hence
/// concave, so the walk stops at the best ladder point.
pub fn build_upsilon(m: &GraphMatrices) -> Result<UpsilonResult> {
    let gram = &m.e.transpose() * &m.e;
    let basis = nullspace_sym_psd(&gram, DEFAULT_NULL_TOL)?;
    let kernel_dim = basis.as_ref().map_or(0, Matrix::cols);
    let floor = 1e-10 * m.w.max_abs();

    let mu = match &basis {
        None => 0.0,
        Some(v) => search_mu(m, v, floor)?,
    };

    let upsilon = upsilon_for(m, basis.as_ref(), mu);
    let pd_margin = weighted_margin(&m.w, &upsilon)?;
    if pd_margin <= floor {
        return Err(Error::MuSearchFailed {
            best_mu: mu,
            best_margin: pd_margin,
        });
    }
    let omega = omega_for(m, &upsilon);
    let result = UpsilonResult {
        upsilon,
        mu,
        omega,
        pd_margin,
        kernel_dim,
        kernel_basis: basis,
    };
    let residual = result.identity_residual(m);
    if residual > 1e-8 * unit_floor(m.l.max_abs()) {
        return Err(Error::InvalidArgument(format!(
            "incidence data inconsistent: |ΥEᵀ − EᵀL| = {residual:.3e}"
        )));
    }
    Ok(result)
}

fn search_mu(m: &GraphMatrices, basis: &Matrix, floor: f64) -> Result<f64> {
    let lap = sym_eig(&m.l)?;
    let cutoff = DEFAULT_NULL_TOL * lap.max().max(1.0);
    let mu0 = lap
        .eigenvalues
        .iter()
        .copied()
        .find(|&l| l > cutoff)
        .unwrap_or(1.0);

    let margin = |mu: f64| weighted_margin(&m.w, &upsilon_for(m, Some(basis), mu));
    let improves = |new: f64, old: f64| new > old + 1e-9 * unit_floor(old);

    let mut best_mu = mu0;
    let mut best = margin(mu0)?;
    for factor in [2.0, 0.5] {
        let mut moved = false;
        let mut mu = best_mu;
        for _ in 0..MU_LADDER_STEPS {
            mu *= factor;
            let candidate = margin(mu)?;
            if !improves(candidate, best) {
                break;
            }
            best = candidate;
            best_mu = mu;
            moved = true;
        }
        if moved {
            break;
        }
    }
    if best <= floor {
        return Err(Error::MuSearchFailed {
            best_mu,
            best_margin: best,
        });
    }
    Ok(best_mu)
}

fn omega_for(m: &GraphMatrices, upsilon: &Matrix) -> Matrix {
    let abs_et = m.e.transpose().abs();
    (&(&abs_et * &m.l) - &(upsilon * &abs_et)).scale(0.5)
}

/// `Ω = ½(|Eᵀ|L − Υ|Eᵀ|)`.
pub fn build_omega(m: &GraphMatrices, u: &UpsilonResult) -> Matrix {
    omega_for(m, &u.upsilon)
}

/// Max-norm residuals of `E_kᵀL = ΥE_kᵀ + Ω` and `E_lᵀL = ΥE_lᵀ + Ω`.
pub fn verify_endpoint_identities(m: &GraphMatrices, u: &UpsilonResult) -> (f64, f64) {
    let residual = |part: &Matrix| {
        let pt = part.transpose();
        (&(&pt * &m.l) - &(&(&u.upsilon * &pt) + &u.omega)).max_abs()
    };
    (residual(&m.e_k), residual(&m.e_l))
}
