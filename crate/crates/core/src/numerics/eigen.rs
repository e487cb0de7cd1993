use super::Matrix;
use crate::error::{Error, Result};

/// Maximum number of cyclic Jacobi sweeps.
pub const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix, `A = Q Λ Qᵀ`.
#[derive(Debug, Clone)]
pub struct SymEigDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, column `i` paired with `eigenvalues[i]`.
    pub eigenvectors: Matrix,
}

impl SymEigDecomposition {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// `Q Λ Qᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let q = &self.eigenvectors;
        let n = q.rows();
        Matrix::from_fn(n, n, |i, j| {
            self.eigenvalues
                .iter()
                .enumerate()
                .map(|(k, &l)| q[(i, k)] * l * q[(j, k)])
                .sum()
        })
    }
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// The input must be symmetric to `1e-9·max(1, ‖A‖_max)`; it is symmetrized
/// before rotating. Eigenvalues come back ascending.
pub fn sym_eig(a: &Matrix) -> Result<SymEigDecomposition> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigen-decomposition of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let asymmetry = a.asymmetry();
    if asymmetry > 1e-9 * a.max_abs().max(1.0) {
        return Err(Error::NonSymmetric { asymmetry });
    }

    let n = a.rows();
    let mut s = a.symmetric_part();
    let mut v = Matrix::identity(n);
    let scale = s.frobenius();

    let mut converged = scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off = off_diagonal_norm(&s);
        if off <= 1e-15 * scale || off < f64::MIN_POSITIVE {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut s, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&s) > 1e-15 * scale {
        return Err(Error::NoConvergence {
            what: "cyclic Jacobi",
            iterations: MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[(i, i)].total_cmp(&s[(j, j)]));
    let eigenvalues = order.iter().map(|&i| s[(i, i)]).collect();
    let eigenvectors = v.select_columns(&order).expect("n >= 1");
    Ok(SymEigDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(s: &Matrix) -> f64 {
    let n = s.rows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            sum += s[(p, q)] * s[(p, q)];
        }
    }
    (2.0 * sum).sqrt()
}

/// Annihilates `s[p][q]` with a plane rotation and accumulates it into `v`.
fn rotate(s: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = s[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = s[(p, p)];
    let aqq = s[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    // theta == 0 gives signum 1 for +0.0, which is the 45° rotation we want.
    let c = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * c;
    if sn == 0.0 {
        s[(p, q)] = 0.0;
        s[(q, p)] = 0.0;
        return;
    }

    let n = s.rows();
    for k in 0..n {
        let skp = s[(k, p)];
        let skq = s[(k, q)];
        s[(k, p)] = c * skp - sn * skq;
        s[(k, q)] = sn * skp + c * skq;
    }
    for k in 0..n {
        let spk = s[(p, k)];
        let sqk = s[(q, k)];
        s[(p, k)] = c * spk - sn * sqk;
        s[(q, k)] = sn * spk + c * sqk;
    }
    s[(p, q)] = 0.0;
    s[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - sn * vkq;
        v[(k, q)] = sn * vkp + c * vkq;
    }
}

/// Orthonormal basis of the (numerical) kernel of a symmetric PSD matrix.
///
/// Returns eigenvectors whose eigenvalue is `<= rel_tol·max(1, λ_max)`, or
/// `None` when the kernel is trivial.
pub fn nullspace_sym_psd(a: &Matrix, rel_tol: f64) -> Result<Option<Matrix>> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "null-space tolerance {rel_tol} outside (0, 1)"
        )));
    }
    let eig = sym_eig(a)?;
    let cutoff = rel_tol * eig.max().max(1.0);
    let idx: Vec<usize> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l <= cutoff)
        .map(|(i, _)| i)
        .collect();
    Ok(eig.eigenvectors.select_columns(&idx))
}

/// Default relative tolerance for [`nullspace_sym_psd`].
pub const DEFAULT_NULL_TOL: f64 = 1e-9;

/// Smallest real part over the eigenvalues of a general square matrix.
///
/// Diagnostic only; nothing in the synchronization pipeline depends on it.
pub fn min_real_eigenvalue(a: &Matrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("eigenvalues of a non-square matrix".into()));
    }
    let n = a.rows();
    let m = nalgebra::DMatrix::from_row_slice(n, n, a.as_slice());
    let eig = m.complex_eigenvalues();
    Ok(eig.iter().map(|z| z.re).fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn orthonormality_error(q: &Matrix) -> f64 {
        (&(&q.transpose() * q) - &Matrix::identity(q.cols())).max_abs()
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let eig = sym_eig(&Matrix::identity(2)).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0]);
        for j in 0..2 {
            for i in 0..2 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(eig.eigenvectors[(i, j)].abs(), expected);
            }
        }
    }

    #[test]
    fn two_by_two_tridiagonal() {
        let a = Matrix::from_rows(&[[2.0, -1.0], [-1.0, 2.0]]).unwrap();
        let eig = sym_eig(&a).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let eig = sym_eig(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(eig.eigenvalues, vec![0.0; 3]);
        assert!(orthonormality_error(&eig.eigenvectors) == 0.0);
    }

    #[test]
    fn rejects_non_symmetric() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&a), Err(Error::NonSymmetric { .. })));
        assert!(sym_eig(&Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn random_symmetric_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let raw = Matrix::from_fn(6, 6, |_, _| rng.random_range(-5.0..5.0));
            let a = raw.symmetric_part();
            let eig = sym_eig(&a).unwrap();
            assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            assert!(orthonormality_error(&eig.eigenvectors) <= 1e-10);
            assert!((&eig.reconstruct() - &a).max_abs() <= 1e-8);
            let aq = &a * &eig.eigenvectors;
            let ql = &eig.eigenvectors * &Matrix::from_diag(&eig.eigenvalues);
            assert!((&aq - &ql).max_abs() <= 1e-8 * a.max_abs().max(1.0));
        }
    }

    #[test]
    fn nullspace_examples() {
        assert!(nullspace_sym_psd(&Matrix::identity(2), 1e-9).unwrap().is_none());

        let lap = Matrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap();
        let ns = nullspace_sym_psd(&lap, 1e-9).unwrap().unwrap();
        assert_eq!(ns.cols(), 1);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((ns[(0, 0)].abs() - r).abs() < 1e-14);
        assert!((ns[(0, 0)] - ns[(1, 0)]).abs() < 1e-14);

        let ns = nullspace_sym_psd(&Matrix::zeros(2, 2), 1e-9).unwrap().unwrap();
        assert_eq!(ns.cols(), 2);
        assert!(orthonormality_error(&ns) < 1e-15);

        assert!(nullspace_sym_psd(&lap, 0.0).is_err());
    }

    #[test]
    fn general_eigenvalues_of_triangular() {
        let a = Matrix::from_rows(&[[-2.0, 5.0], [0.0, 3.0]]).unwrap();
        assert!((min_real_eigenvalue(&a).unwrap() + 2.0).abs() < 1e-12);
    }
}
