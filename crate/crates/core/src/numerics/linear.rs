use super::{sym_eig, Matrix};
use crate::error::{Error, Result};

/// Solves `a x = b` by LU with partial pivoting.
///
/// Fails with [`Error::Singular`] when a pivot falls below `1e-12·‖a‖_max`.
pub fn solve_linear(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if !a.is_square() || b.rows() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "solve with a {}x{} and b {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = a.rows();
    let threshold = 1e-12 * a.max_abs();
    let mut lu = a.clone();
    let mut x = b.clone();
    let m = b.cols();

    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, lu[(r, col)]))
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .expect("non-empty pivot range");
        if pivot.abs() <= threshold || pivot == 0.0 {
            return Err(Error::Singular { pivot: pivot.abs() });
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(pivot_row, j)];
                lu[(pivot_row, j)] = tmp;
            }
            for j in 0..m {
                let tmp = x[(col, j)];
                x[(col, j)] = x[(pivot_row, j)];
                x[(pivot_row, j)] = tmp;
            }
        }
        for r in (col + 1)..n {
            let factor = lu[(r, col)] / pivot;
            if factor == 0.0 {
                continue;
            }
            lu[(r, col)] = 0.0;
            for j in (col + 1)..n {
                lu[(r, j)] -= factor * lu[(col, j)];
            }
            for j in 0..m {
                x[(r, j)] -= factor * x[(col, j)];
            }
        }
    }

    for col in (0..n).rev() {
        let d = lu[(col, col)];
        for j in 0..m {
            let mut acc = x[(col, j)];
            for k in (col + 1)..n {
                acc -= lu[(col, k)] * x[(k, j)];
            }
            x[(col, j)] = acc / d;
        }
    }
    Ok(x)
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    solve_linear(a, &Matrix::identity(a.rows()))
}

/// Solves the continuous Lyapunov equation `aᵀX + Xa + q = 0`.
///
/// Uses the `n²×n²` Kronecker system; the result is symmetrized.
pub fn lyapunov_solve(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    if !a.is_square() || q.shape() != a.shape() {
        return Err(Error::DimensionMismatch(format!(
            "lyapunov with a {}x{} and q {}x{}",
            a.rows(),
            a.cols(),
            q.rows(),
            q.cols()
        )));
    }
    let n = a.rows();
    let dim = n * n;
    // Row (i, j) of the system is entry (i, j) of aᵀX + Xa.
    let mut kron = Matrix::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..n {
                kron[(row, k * n + j)] += a[(k, i)];
                kron[(row, i * n + k)] += a[(k, j)];
            }
        }
    }
    let rhs = Matrix::from_fn(dim, 1, |r, _| -q[(r / n, r % n)]);
    let sol = solve_linear(&kron, &rhs)?;
    let x = Matrix::from_fn(n, n, |i, j| sol[(i * n + j, 0)]);
    Ok(x.symmetric_part())
}

/// Whether every eigenvalue of `a` has negative real part.
///
/// Tested through the Lyapunov characterization: `aᵀY + Ya = -I` has a
/// positive definite solution exactly when `a` is Hurwitz.
pub fn is_hurwitz(a: &Matrix) -> Result<bool> {
    let y = match lyapunov_solve(a, &Matrix::identity(a.rows())) {
        Ok(y) => y,
        Err(Error::Singular { .. }) => return Ok(false),
        Err(e) => return Err(e),
    };
    Ok(sym_eig(&y)?.min() > 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solve_returns_rhs() {
        let b = Matrix::from_rows(&[[1.5, -2.0], [0.25, 7.0], [3.0, 1.0]]).unwrap();
        let x = solve_linear(&Matrix::identity(3), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn diagonal_solve() {
        let a = Matrix::from_diag(&[2.0, 4.0]);
        let b = Matrix::column(&[2.0, 8.0]).unwrap();
        let x = solve_linear(&a, &b).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn singular_detected() {
        let a = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let b = Matrix::column(&[1.0, 2.0]).unwrap();
        assert!(matches!(solve_linear(&a, &b), Err(Error::Singular { .. })));
        assert!(solve_linear(&Matrix::zeros(2, 2), &b).is_err());
    }

    #[test]
    fn pivoting_residual() {
        let a = Matrix::from_rows(&[[1e-14, 1.0, 2.0], [3.0, -1.0, 0.5], [2.0, 4.0, -6.0]]).unwrap();
        let b = Matrix::from_rows(&[[1.0, 0.0], [2.0, 1.0], [-3.0, 5.0]]).unwrap();
        let x = solve_linear(&a, &b).unwrap();
        assert!((&(&a * &x) - &b).max_abs() <= 1e-8 * b.max_abs().max(1.0));
    }

    #[test]
    fn lyapunov_examples() {
        let x = lyapunov_solve(&Matrix::identity(2).scale(-1.0), &Matrix::identity(2).scale(2.0))
            .unwrap();
        assert!((&x - &Matrix::identity(2)).max_abs() < 1e-15);

        let x = lyapunov_solve(&Matrix::from_diag(&[-1.0]), &Matrix::from_diag(&[4.0])).unwrap();
        assert!((x[(0, 0)] - 2.0).abs() < 1e-15);

        let r = lyapunov_solve(&Matrix::zeros(1, 1), &Matrix::identity(1));
        assert!(matches!(r, Err(Error::Singular { .. })));
    }

    #[test]
    fn lyapunov_residual_nonsymmetric_a() {
        let a = Matrix::from_rows(&[[-1.0, 2.0, 0.0], [0.0, -3.0, 1.0], [0.5, 0.0, -2.0]]).unwrap();
        let q = Matrix::from_rows(&[[2.0, 0.5, 0.0], [0.5, 1.0, 0.1], [0.0, 0.1, 3.0]]).unwrap();
        let x = lyapunov_solve(&a, &q).unwrap();
        let residual = &(&(&a.transpose() * &x) + &(&x * &a)) + &q;
        assert!(residual.max_abs() <= 1e-8 * q.max_abs().max(1.0));
        assert_eq!(x.asymmetry(), 0.0);
    }

    #[test]
    fn hurwitz_test() {
        assert!(is_hurwitz(&Matrix::from_rows(&[[0.0, 1.0], [-2.0, -3.0]]).unwrap()).unwrap());
        assert!(!is_hurwitz(&Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap()).unwrap());
        assert!(!is_hurwitz(&Matrix::from_diag(&[1.0, -1.0])).unwrap());
    }
}
