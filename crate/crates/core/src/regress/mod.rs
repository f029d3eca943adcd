//! Dual-form kernel regressors for intensity prediction.

mod ensemble;
mod grid;
mod kernel;
mod krr;
mod svr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ensemble::{ensemble_average, greedy_ensemble_select};
pub use grid::{
    default_grid, grid_search, parse_grid_json, read_grid, score_grid, ConfigScore, GridEntry, GridResult,
    Hyperparameters, RegressorConfig,
};
pub use kernel::{cross_kernel, kernel_matrix, Kernel};
pub use krr::fit_krr;
pub use svr::{fit_svr, fit_svr_with, SvrOptions};

/// Training method and its regularization constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    Krr { lambda: f64 },
    Svr { c: f64, epsilon: f64 },
}

/// A fitted regressor: `f(x) = Σ dual_coeffs[i] · k(support_inputs[i], x) + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    pub method: Method,
    pub kernel: Kernel,
    /// One support row per dual coefficient.
    pub support_inputs: DMatrix<f64>,
    pub dual_coeffs: Vec<f64>,
    pub bias: f64,
}

impl KernelModel {
    pub fn n_features(&self) -> usize {
        self.support_inputs.ncols()
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        predict(self, x)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.dual_coeffs.len() != self.support_inputs.nrows() {
            return Err(Error::ModelVersion(format!(
                "{} dual coefficients for {} support rows",
                self.dual_coeffs.len(),
                self.support_inputs.nrows()
            )));
        }
        self.kernel.validate()?;
        if let Method::Svr { c, .. } = self.method {
            if self.dual_coeffs.iter().any(|a| a.abs() > c + 1e-9) {
                return Err(Error::ModelVersion("SVR coefficient exceeds C".into()));
            }
        }
        Ok(())
    }
}

pub fn predict(model: &KernelModel, x: &DMatrix<f64>) -> Result<Vec<f64>> {
    if x.nrows() == 0 {
        return Ok(Vec::new());
    }
    if x.ncols() != model.n_features() {
        return Err(Error::Dimension {
            expected: model.n_features(),
            got: x.ncols(),
        });
    }
    let k = cross_kernel(&model.kernel, x, &model.support_inputs);
    Ok((0..x.nrows())
        .map(|i| {
            let s: f64 = k.row(i).iter().zip(&model.dual_coeffs).map(|(kv, a)| kv * a).sum();
            s + model.bias
        })
        .collect())
}

/// Clamps predictions to [0, 1] for final intensity reports.
pub fn clip_unit(pred: &[f64]) -> Vec<f64> {
    pred.iter().map(|p| p.clamp(0.0, 1.0)).collect()
}

pub(crate) fn check_training_set(x: &DMatrix<f64>, y: &[f64], min_rows: usize) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::Dimension {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if x.nrows() < min_rows {
        return Err(Error::InvalidInput(format!(
            "need at least {min_rows} training rows, got {}",
            x.nrows()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("training data contains non-finite values".into()));
    }
    Ok(())
}

/// Copies matrix rows into contiguous row-major storage.
pub(crate) fn row_major(x: &DMatrix<f64>) -> Vec<f64> {
    x.transpose().as_slice().to_vec()
}
