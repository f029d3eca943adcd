use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::row_major;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Kernel {
    /// `x · y`
    Linear,
    /// `exp(-gamma |x - y|²)`
    Rbf { gamma: f64 },
    /// `(gamma x · y + coef0)^degree`
    Poly { gamma: f64, degree: u32, coef0: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
            Kernel::Poly { gamma, degree, coef0 } => (gamma * dot(a, b) + coef0).powi(degree as i32),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Linear => Ok(()),
            Kernel::Rbf { gamma } if gamma > 0.0 && gamma.is_finite() => Ok(()),
            Kernel::Poly { gamma, degree, coef0 } if gamma > 0.0 && degree >= 1 && coef0.is_finite() => Ok(()),
            other => Err(Error::InvalidInput(format!("invalid kernel parameters {other:?}"))),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram matrix of the rows of `x`; exactly symmetric.
pub fn kernel_matrix(kernel: &Kernel, x: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = x.shape();
    let rows = row_major(x);
    let row = |i: usize| &rows[i * n..(i + 1) * n];
    let mut k = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = kernel.eval(row(i), row(j));
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// `K[i, j] = k(a_i, b_j)`.
pub fn cross_kernel(kernel: &Kernel, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    let ra = row_major(a);
    let rb = row_major(b);
    DMatrix::from_fn(a.nrows(), b.nrows(), |i, j| {
        kernel.eval(&ra[i * n..(i + 1) * n], &rb[j * n..(j + 1) * n])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rbf_gram_is_symmetric_with_unit_diagonal() {
        let x = DMatrix::from_fn(7, 3, |i, j| ((i * 3 + j) as f64).sin());
        let k = kernel_matrix(&Kernel::Rbf { gamma: 0.7 }, &x);
        assert_eq!(k, k.transpose());
        for i in 0..7 {
            assert_eq!(k[(i, i)], 1.0);
        }
    }

    #[test]
    fn poly_matches_formula() {
        let k = Kernel::Poly {
            gamma: 0.5,
            degree: 2,
            coef0: 1.0,
        };
        assert_eq!(k.eval(&[1.0, 2.0], &[3.0, 4.0]), (0.5 * 11.0 + 1.0f64).powi(2));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Kernel::Rbf { gamma: 0.0 }.validate().is_err());
        assert!(Kernel::Poly {
            gamma: 1.0,
            degree: 0,
            coef0: 0.0
        }
        .validate()
        .is_err());
    }
}
