use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_krr, fit_svr, predict, Kernel, KernelModel, Method};
use crate::error::{Error, Result};
use crate::eval::pearson;

/// One point of a hyperparameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridEntry", into = "GridEntry")]
pub struct RegressorConfig {
    pub method: Method,
    pub kernel: Kernel,
}

impl RegressorConfig {
    pub fn fit(&self, x: &DMatrix<f64>, y: &[f64]) -> Result<KernelModel> {
        match self.method {
            Method::Krr { lambda } => fit_krr(x, y, self.kernel, lambda),
            Method::Svr { c, epsilon } => fit_svr(x, y, self.kernel, c, epsilon),
        }
    }
}

/// On-disk grid entry: `{"method": "krr"|"svr", "kernel": {...}, "hyperparameters": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub method: String,
    pub kernel: Kernel,
    pub hyperparameters: Hyperparameters,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl TryFrom<GridEntry> for RegressorConfig {
    type Error = String;

    fn try_from(e: GridEntry) -> std::result::Result<Self, String> {
        let h = &e.hyperparameters;
        let method = match e.method.as_str() {
            "krr" => Method::Krr {
                lambda: h.lambda.ok_or("krr entry needs hyperparameters.lambda")?,
            },
            "svr" => Method::Svr {
                c: h.c.ok_or("svr entry needs hyperparameters.c")?,
                epsilon: h.epsilon.ok_or("svr entry needs hyperparameters.epsilon")?,
            },
            other => return Err(format!("unknown method '{other}'")),
        };
        e.kernel.validate().map_err(|err| err.to_string())?;
        Ok(RegressorConfig {
            method,
            kernel: e.kernel,
        })
    }
}

impl From<RegressorConfig> for GridEntry {
    fn from(c: RegressorConfig) -> Self {
        let (method, hyperparameters) = match c.method {
            Method::Krr { lambda } => (
                "krr",
                Hyperparameters {
                    lambda: Some(lambda),
                    ..Default::default()
                },
            ),
            Method::Svr { c, epsilon } => (
                "svr",
                Hyperparameters {
                    c: Some(c),
                    epsilon: Some(epsilon),
                    ..Default::default()
                },
            ),
        };
        GridEntry {
            method: method.to_string(),
            kernel: c.kernel,
            hyperparameters,
        }
    }
}

pub fn parse_grid_json(text: &str) -> Result<Vec<RegressorConfig>> {
    let grid: Vec<RegressorConfig> = serde_json::from_str(text)?;
    if grid.is_empty() {
        return Err(Error::InvalidInput("grid is empty".into()));
    }
    Ok(grid)
}

pub fn read_grid(path: &Path) -> Result<Vec<RegressorConfig>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_grid_json(&text)
}

/// RBF grid over KRR λ ∈ {1e-3, 1e-2, 0.1, 1} and SVR C ∈ {0.1, 1, 10} ×
/// ε ∈ {0.01, 0.05, 0.1}, each with γ ∈ {1/N, 0.1/N, 10/N}.
pub fn default_grid(n_features: usize) -> Vec<RegressorConfig> {
    let n = n_features.max(1) as f64;
    let gammas = [1.0 / n, 0.1 / n, 10.0 / n];
    let mut grid = Vec::new();
    for &gamma in &gammas {
        for lambda in [1e-3, 1e-2, 0.1, 1.0] {
            grid.push(RegressorConfig {
                method: Method::Krr { lambda },
                kernel: Kernel::Rbf { gamma },
            });
        }
    }
    for &gamma in &gammas {
        for c in [0.1, 1.0, 10.0] {
            for epsilon in [0.01, 0.05, 0.1] {
                grid.push(RegressorConfig {
                    method: Method::Svr { c, epsilon },
                    kernel: Kernel::Rbf { gamma },
                });
            }
        }
    }
    grid
}

/// Dev score of one grid point. `dev_pearson` is −∞ when the point could
/// not be scored; `flag` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigScore {
    pub config: RegressorConfig,
    #[serde(with = "score_serde")]
    pub dev_pearson: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

// JSON has no infinities
mod score_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub scores: Vec<ConfigScore>,
    pub best: usize,
    /// Winner refitted on train ∪ dev.
    pub model: KernelModel,
}

impl GridResult {
    pub fn best_config(&self) -> &RegressorConfig {
        &self.scores[self.best].config
    }
}

/// Fits every config on train and scores it on dev. Configs are evaluated in
/// parallel; the output keeps grid order.
pub fn score_grid(
    train_x: &DMatrix<f64>,
    train_y: &[f64],
    dev_x: &DMatrix<f64>,
    dev_y: &[f64],
    grid: &[RegressorConfig],
) -> Result<(Vec<ConfigScore>, usize)> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("grid is empty".into()));
    }
    if dev_x.nrows() != dev_y.len() {
        return Err(Error::Dimension {
            expected: dev_x.nrows(),
            got: dev_y.len(),
        });
    }
    let scores: Vec<ConfigScore> = grid
        .par_iter()
        .map(|cfg| {
            let scored = cfg
                .fit(train_x, train_y)
                .and_then(|m| predict(&m, dev_x))
                .and_then(|p| pearson(&p, dev_y));
            match scored {
                Ok(r) => ConfigScore {
                    config: *cfg,
                    dev_pearson: r,
                    flag: None,
                },
                Err(e) => ConfigScore {
                    config: *cfg,
                    dev_pearson: f64::NEG_INFINITY,
                    flag: Some(e.to_string()),
                },
            }
        })
        .collect();
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if s.dev_pearson > scores[best].dev_pearson {
            best = i;
        }
    }
    Ok((scores, best))
}

/// Grid search on the dev split followed by a refit of the winner on the
/// union of train and dev.
pub fn grid_search(
    train_x: &DMatrix<f64>,
    train_y: &[f64],
    dev_x: &DMatrix<f64>,
    dev_y: &[f64],
    grid: &[RegressorConfig],
) -> Result<GridResult> {
    let (scores, best) = score_grid(train_x, train_y, dev_x, dev_y, grid)?;
    if train_x.ncols() != dev_x.ncols() {
        return Err(Error::Dimension {
            expected: train_x.ncols(),
            got: dev_x.ncols(),
        });
    }
    let mut all_x = DMatrix::zeros(train_x.nrows() + dev_x.nrows(), train_x.ncols());
    all_x.rows_mut(0, train_x.nrows()).copy_from(train_x);
    all_x.rows_mut(train_x.nrows(), dev_x.nrows()).copy_from(dev_x);
    let all_y: Vec<f64> = train_y.iter().chain(dev_y).copied().collect();
    let model = scores[best].config.fit(&all_x, &all_y)?;
    Ok(GridResult { scores, best, model })
}
