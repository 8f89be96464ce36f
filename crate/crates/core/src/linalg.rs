//! QR-based least squares shared by the regression and diagnostics modules.
//!
//! Both the profiled MIDAS objective and the reported inference go through
//! [`least_squares`], so the coefficients the optimiser sees are bit-for-bit
//! the coefficients the final fit reports.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solution of `min ||y - X b||^2` together with the pieces needed for
/// classical inference.
#[derive(Debug)]
pub(crate) struct LeastSquares {
    pub beta: DVector<f64>,
    pub residuals: DVector<f64>,
    pub rss: f64,
    r: DMatrix<f64>,
}

impl LeastSquares {
    /// `(X^T X)^{-1}`, reconstructed from the triangular factor.
    pub fn xtx_inverse(&self) -> DMatrix<f64> {
        let k = self.r.ncols();
        let r_inv = self
            .r
            .clone()
            .solve_upper_triangular(&DMatrix::identity(k, k))
            .expect("R is nonsingular after the rank check");
        &r_inv * r_inv.transpose()
    }
}

/// Index of the first column of `x` that is (numerically) a linear
/// combination of the columns before it, if any.
pub(crate) fn first_dependent_column(x: &DMatrix<f64>) -> Option<usize> {
    let k = x.ncols();
    if k == 0 {
        return None;
    }
    let r = x.clone().qr().r();
    let max_diag = (0..k).map(|i| r[(i, i)].abs()).fold(0.0f64, f64::max);
    let tol = f64::EPSILON * (x.nrows().max(k) as f64) * max_diag;
    (0..k).find(|&i| r[(i, i)].abs() <= tol)
}

/// Solve the least-squares problem via a Householder QR decomposition.
///
/// Rank deficiency is detected from the diagonal of `R` with a tolerance
/// scaled to the problem size, and reported with the index of the first
/// offending column.
pub(crate) fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<LeastSquares> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::ShapeMismatch {
            context: "least_squares".to_string(),
            left: n,
            right: y.len(),
        });
    }
    if n < k {
        return Err(Error::InsufficientData {
            context: "least_squares".to_string(),
            needed: k,
            got: n,
        });
    }
    if k == 0 {
        return Err(Error::InvalidParameter {
            message: "least_squares needs at least one column".to_string(),
        });
    }

    let qr = x.clone().qr();
    let r = qr.r();
    let max_diag = (0..k).map(|i| r[(i, i)].abs()).fold(0.0f64, f64::max);
    let tol = f64::EPSILON * (n.max(k) as f64) * max_diag;
    for i in 0..k {
        if r[(i, i)].abs() <= tol {
            return Err(Error::RankDeficient {
                message: format!("column {} is linearly dependent on earlier columns", i),
            });
        }
    }

    let qty = qr.q().transpose() * y;
    let beta = r
        .clone()
        .solve_upper_triangular(&qty)
        .expect("R is nonsingular after the rank check");
    let residuals = y - x * &beta;
    let rss = residuals.norm_squared();
    Ok(LeastSquares {
        beta,
        residuals,
        rss,
        r,
    })
}
