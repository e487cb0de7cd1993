//! Dense linear-algebra kernel: matrices, symmetric eigen-decomposition,
//! LU solves and the Kronecker-form Lyapunov solver.

mod eigen;
mod linear;
mod matrix;

pub use eigen::{
    min_real_eigenvalue, nullspace_sym_psd, sym_eig, SymEigDecomposition, DEFAULT_NULL_TOL,
    MAX_SWEEPS,
};
pub use linear::{inverse, is_hurwitz, lyapunov_solve, solve_linear};
pub use matrix::Matrix;

/// `max(1, |x|)`, the floor used by every relative tolerance in the crate.
#[inline]
pub fn unit_floor(x: f64) -> f64 {
    x.abs().max(1.0)
}
