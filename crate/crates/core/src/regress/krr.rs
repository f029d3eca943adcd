use nalgebra::{DMatrix, DVector};

use super::{check_training_set, kernel_matrix, Kernel, KernelModel, Method};
use crate::error::{Error, Result};

const JITTER_START: f64 = 1e-10;
const JITTER_RETRIES: usize = 3;

/// Kernel ridge regression: solves `(K + λI) α = y` by Cholesky.
///
/// If the factorization fails, a diagonal jitter starting at 1e-10 is added
/// and grown tenfold, at most three times.
pub fn fit_krr(x: &DMatrix<f64>, y: &[f64], kernel: Kernel, lambda: f64) -> Result<KernelModel> {
    check_training_set(x, y, 1)?;
    kernel.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "ridge lambda must be positive, got {lambda}"
        )));
    }
    let m = x.nrows();
    let mut a = kernel_matrix(&kernel, x);
    for i in 0..m {
        a[(i, i)] += lambda;
    }

    let mut jitter = 0.0;
    let chol = loop {
        let mut attempt = a.clone();
        if jitter > 0.0 {
            for i in 0..m {
                attempt[(i, i)] += jitter;
            }
        }
        if let Some(c) = attempt.cholesky() {
            break c;
        }
        jitter = if jitter == 0.0 { JITTER_START } else { jitter * 10.0 };
        if jitter > JITTER_START * 10f64.powi(JITTER_RETRIES as i32 - 1) {
            return Err(Error::Numerical(
                "kernel matrix is not positive definite after jitter escalation".into(),
            ));
        }
    };
    let alpha = chol.solve(&DVector::from_column_slice(y));
    if alpha.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite dual coefficients".into()));
    }
    Ok(KernelModel {
        method: Method::Krr { lambda },
        kernel,
        support_inputs: x.clone(),
        dual_coeffs: alpha.iter().copied().collect(),
        bias: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_closed_form() {
        let x = DMatrix::from_row_slice(1, 2, &[0.3, -0.2]);
        let m = fit_krr(&x, &[0.8], Kernel::Rbf { gamma: 1.0 }, 0.25).unwrap();
        assert!((m.dual_coeffs[0] - 0.8 / 1.25).abs() < 1e-15);
        let p = m.predict(&x).unwrap();
        assert!((p[0] - 0.8 / 1.25).abs() < 1e-15);
    }

    #[test]
    fn tiny_ridge_interpolates() {
        let x = DMatrix::from_fn(6, 2, |i, j| i as f64 * 0.7 + j as f64 * 0.3);
        let y = [0.1, 0.5, 0.2, 0.9, 0.4, 0.6];
        let m = fit_krr(&x, &y, Kernel::Rbf { gamma: 1.0 }, 1e-12).unwrap();
        for (p, t) in m.predict(&x).unwrap().iter().zip(&y) {
            assert!((p - t).abs() < 1e-6, "{p} vs {t}");
        }
    }

    #[test]
    fn nonpositive_lambda_rejected() {
        let x = DMatrix::from_row_slice(1, 1, &[1.0]);
        assert!(fit_krr(&x, &[1.0], Kernel::Linear, 0.0).is_err());
    }
}
