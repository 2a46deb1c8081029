//! Small dense least-squares helpers used by the coders.

use nalgebra::{DMatrix, DVector};

/// Ridge added to the normal equations when the QR factor is rank deficient.
pub const RIDGE: f64 = 1e-12;

/// Relative threshold on `|R_ii|` below which a QR factor counts as singular.
pub(crate) const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coeffs: DVector<f64>,
    /// True when the ridge fallback was used.
    pub ridge: bool,
}

/// Minimizes `|A c - b|_2` by Householder QR, falling back to
/// `(A^T A + RIDGE I) c = A^T b` when `A` is rank deficient or wide.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> LeastSquares {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return LeastSquares { coeffs: DVector::zeros(0), ridge: false };
    }
    if rows >= cols {
        let qr = a.clone().qr();
        let r = qr.r();
        let diag_max = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diag_min = r.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if diag_max > 0.0 && diag_min > RANK_TOL * diag_max {
            let qtb = qr.q().transpose() * b;
            if let Some(c) = r.solve_upper_triangular(&qtb) {
                return LeastSquares { coeffs: c, ridge: false };
            }
        }
    }
    ridge_solve(a, b, RIDGE)
}

/// Ridge-regularized normal equations.
pub fn ridge_solve(a: &DMatrix<f64>, b: &DVector<f64>, ridge: f64) -> LeastSquares {
    let cols = a.ncols();
    let mut normal = a.transpose() * a;
    for i in 0..cols {
        normal[(i, i)] += ridge;
    }
    let rhs = a.transpose() * b;
    let coeffs = match normal.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => normal
            .lu()
            .solve(&rhs)
            .unwrap_or_else(|| DVector::zeros(cols)),
    };
    LeastSquares { coeffs, ridge: true }
}

/// Same as [`least_squares`] but on normal equations given directly as a
/// Gram block `G` and right-hand side `h` (used by the kernel coders).
pub fn gram_solve(g: &DMatrix<f64>, h: &DVector<f64>) -> LeastSquares {
    let k = g.nrows();
    if k == 0 {
        return LeastSquares { coeffs: DVector::zeros(0), ridge: false };
    }
    let diag_max = g.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(ch) = g.clone().cholesky() {
        let l_diag_min = ch.l_dirty().diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        // Cholesky pivots are the squared QR pivots, hence the squared tolerance.
        if diag_max > 0.0 && l_diag_min * l_diag_min > RANK_TOL * RANK_TOL * diag_max {
            return LeastSquares { coeffs: ch.solve(h), ridge: false };
        }
    }
    let mut reg = g.clone();
    for i in 0..k {
        reg[(i, i)] += RIDGE;
    }
    let coeffs = match reg.clone().cholesky() {
        Some(ch) => ch.solve(h),
        None => reg.lu().solve(h).unwrap_or_else(|| DVector::zeros(k)),
    };
    LeastSquares { coeffs, ridge: true }
}

/// Columns of `a` listed in `support`, in that order.
pub fn select_columns(a: &DMatrix<f64>, support: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), support.len(), |i, j| a[(i, support[j])])
}

/// `C(n, k)` as a float (exact for the sizes that matter here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
