//! Internal helpers for the real symmetric solves behind the test statistics.

use nalgebra::{DMatrix, DVector};

/// Condition number `|lambda|_max / |lambda|_min` of a real symmetric matrix,
/// `INFINITY` when the smallest eigenvalue magnitude is zero.
pub(crate) fn symmetric_condition(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    let mut max = 0.0f64;
    let mut min = f64::INFINITY;
    for &v in eig.eigenvalues.iter() {
        let a = v.abs();
        max = max.max(a);
        min = min.min(a);
    }
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Cholesky solve of `m x = rhs`; `None` when `m` is not positive definite.
pub(crate) fn solve_spd(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    m.clone().cholesky().map(|chol| chol.solve(rhs))
}

/// Inverse of a real symmetric matrix: Cholesky when positive definite, an
/// eigendecomposition otherwise. The product `M M^{-1}` is verified against
/// the identity before the inverse is returned, so a silently corrupted
/// factorization cannot leak into a test statistic.
pub(crate) fn invert_symmetric(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = m.nrows();
    let inverse = match m.clone().cholesky() {
        Some(chol) => chol.inverse(),
        None => {
            let eig = m.clone().symmetric_eigen();
            if eig.eigenvalues.iter().any(|&v| v == 0.0) {
                return None;
            }
            let mut inv_diag = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                inv_diag[(i, i)] = 1.0 / eig.eigenvalues[i];
            }
            &eig.eigenvectors * inv_diag * eig.eigenvectors.transpose()
        }
    };
    // At the condition ceilings enforced by callers (<= 1e12) the legitimate
    // defect is ~1e-4; a mispaired or broken factorization lands at O(1).
    let defect = (m * &inverse - DMatrix::<f64>::identity(n, n)).norm();
    if !defect.is_finite() || defect > 1e-3 * (n as f64) {
        return None;
    }
    Some(inverse)
}
