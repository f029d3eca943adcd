use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::jaccard_multilabel;

const LOSS_TOL: f64 = 1e-9;
const INIT_STD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RlrConfig {
    pub lambda: f64,
    pub lr: f64,
    pub iters: usize,
    pub seed: u64,
}

impl Default for RlrConfig {
    fn default() -> Self {
        RlrConfig {
            lambda: -0.0001,
            lr: 1.0,
            iters: 1000,
            seed: 0,
        }
    }
}

/// Linear multi-label scorer `scores = W x` with per-label thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiLabelModel {
    pub labels: Vec<String>,
    /// C×N.
    pub w: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
    pub lambda: f64,
    pub thresholds: Vec<f64>,
}

impl MultiLabelModel {
    pub fn n_labels(&self) -> usize {
        self.w.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.w.ncols()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let c = self.w.nrows();
        let bad = |m: String| Err(Error::ModelVersion(format!("multi-label model: {m}")));
        if self.labels.len() != c || self.thresholds.len() != c {
            return bad(format!(
                "{} labels and {} thresholds for {c} weight rows",
                self.labels.len(),
                self.thresholds.len()
            ));
        }
        if self.laplacian.shape() != (c, c) {
            return bad(format!(
                "laplacian shape {:?}, expected ({c}, {c})",
                self.laplacian.shape()
            ));
        }
        if self.w.iter().chain(&self.thresholds).any(|v| !v.is_finite()) {
            return bad("non-finite parameter".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RlrFit {
    pub model: MultiLabelModel,
    /// Loss before each update, followed by the final loss.
    pub losses: Vec<f64>,
}

fn check_shapes(w: &DMatrix<f64>, x: &DMatrix<f64>, y: &DMatrix<f64>, l: &DMatrix<f64>) -> Result<()> {
    let (c, n) = w.shape();
    if x.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            got: x.ncols(),
        });
    }
    if y.nrows() != x.nrows() {
        return Err(Error::Dimension {
            expected: x.nrows(),
            got: y.nrows(),
        });
    }
    if y.ncols() != c {
        return Err(Error::Dimension {
            expected: c,
            got: y.ncols(),
        });
    }
    if l.shape() != (c, c) {
        return Err(Error::Dimension {
            expected: c,
            got: l.nrows(),
        });
    }
    if x.nrows() == 0 {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    Ok(())
}

/// `(1/M) Σ_i [‖W x_i − y_i‖² + λ (W x_i)ᵀ L (W x_i)]`.
pub fn rlr_loss(w: &DMatrix<f64>, x: &DMatrix<f64>, y: &DMatrix<f64>, l: &DMatrix<f64>, lambda: f64) -> Result<f64> {
    check_shapes(w, x, y, l)?;
    Ok(loss_unchecked(w, x, y, l, lambda))
}

/// Analytic gradient of [`rlr_loss`] with respect to W.
pub fn rlr_gradient(
    w: &DMatrix<f64>,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    l: &DMatrix<f64>,
    lambda: f64,
) -> Result<DMatrix<f64>> {
    check_shapes(w, x, y, l)?;
    Ok(gradient_unchecked(w, x, y, l, lambda))
}

fn loss_unchecked(w: &DMatrix<f64>, x: &DMatrix<f64>, y: &DMatrix<f64>, l: &DMatrix<f64>, lambda: f64) -> f64 {
    let p = x * w.transpose();
    let r = &p - y;
    let reg = (&p * l).component_mul(&p).sum();
    (r.norm_squared() + lambda * reg) / x.nrows() as f64
}

fn gradient_unchecked(
    w: &DMatrix<f64>,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    l: &DMatrix<f64>,
    lambda: f64,
) -> DMatrix<f64> {
    let p = x * w.transpose();
    // L is symmetric, so d/dP of pᵀLp is 2Lp
    let g = (&p - y) + (&p * l) * lambda;
    (g.transpose() * x) * (2.0 / x.nrows() as f64)
}

/// Full-batch gradient descent from `W ~ N(0, 0.1²)`.
///
/// Stops after `iters` updates or once the loss changes by less than 1e-9.
pub fn train_rlr(x: &DMatrix<f64>, y: &DMatrix<f64>, l: &DMatrix<f64>, cfg: &RlrConfig) -> Result<RlrFit> {
    let (c, n) = (y.ncols(), x.ncols());
    if !(cfg.lr > 0.0 && cfg.lr.is_finite() && cfg.lambda.is_finite()) {
        return Err(Error::InvalidInput(
            "learning rate must be positive and lambda finite".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, INIT_STD).expect("valid std");
    // column-major fill, so the draw order is fixed by shape
    let mut w = DMatrix::from_fn(c, n, |_, _| 0.0);
    for v in w.iter_mut() {
        *v = normal.sample(&mut rng);
    }
    check_shapes(&w, x, y, l)?;

    let mut loss = loss_unchecked(&w, x, y, l, cfg.lambda);
    if !loss.is_finite() {
        return Err(Error::Divergence { iteration: 0 });
    }
    let mut losses = vec![loss];
    for it in 1..=cfg.iters {
        let grad = gradient_unchecked(&w, x, y, l, cfg.lambda);
        w -= grad * cfg.lr;
        let next = loss_unchecked(&w, x, y, l, cfg.lambda);
        if !next.is_finite() {
            return Err(Error::Divergence { iteration: it });
        }
        losses.push(next);
        let done = (loss - next).abs() < LOSS_TOL;
        loss = next;
        if done {
            break;
        }
    }
    Ok(RlrFit {
        model: MultiLabelModel {
            labels: (0..c).map(|j| format!("label{j}")).collect(),
            w,
            laplacian: l.clone(),
            lambda: cfg.lambda,
            thresholds: vec![0.5; c],
        },
        losses,
    })
}

pub fn predict_rlr(model: &MultiLabelModel, x: &[f64]) -> Result<(Vec<f64>, Vec<bool>)> {
    if x.len() != model.n_features() {
        return Err(Error::Dimension {
            expected: model.n_features(),
            got: x.len(),
        });
    }
    let scores: Vec<f64> = (0..model.n_labels())
        .map(|j| model.w.row(j).iter().zip(x).map(|(a, b)| a * b).sum())
        .collect();
    let labels = scores.iter().zip(&model.thresholds).map(|(s, t)| s >= t).collect();
    Ok((scores, labels))
}

/// Scores and labels for every row of `x`.
pub fn predict_rlr_batch(model: &MultiLabelModel, x: &DMatrix<f64>) -> Result<(Vec<Vec<f64>>, Vec<Vec<bool>>)> {
    if x.nrows() > 0 && x.ncols() != model.n_features() {
        return Err(Error::Dimension {
            expected: model.n_features(),
            got: x.ncols(),
        });
    }
    let p = x * model.w.transpose();
    let scores: Vec<Vec<f64>> = (0..p.nrows()).map(|i| p.row(i).iter().copied().collect()).collect();
    let labels = scores
        .iter()
        .map(|s| s.iter().zip(&model.thresholds).map(|(v, t)| v >= t).collect())
        .collect();
    Ok((scores, labels))
}

/// Per-label thresholds maximizing Jaccard on a dev set.
///
/// Labels are swept in order over 0.00, 0.01, …, 1.00 with the remaining
/// labels held at their current thresholds (initially 0.5). Ties go to the
/// candidate closest to 0.5, then to the smaller one.
pub fn tune_thresholds(scores: &[Vec<f64>], gold: &[Vec<bool>]) -> Result<Vec<f64>> {
    let c = gold.first().map_or(0, Vec::len);
    if scores.len() != gold.len() {
        return Err(Error::Dimension {
            expected: gold.len(),
            got: scores.len(),
        });
    }
    if scores.is_empty() {
        return Err(Error::InvalidInput("threshold tuning needs a non-empty dev set".into()));
    }
    if let Some(r) = scores.iter().find(|r| r.len() != c) {
        return Err(Error::Dimension {
            expected: c,
            got: r.len(),
        });
    }
    let mut thresholds = vec![0.5; c];
    let decide = |th: &[f64]| -> Vec<Vec<bool>> {
        scores
            .iter()
            .map(|s| s.iter().zip(th).map(|(v, t)| v >= t).collect())
            .collect()
    };
    for j in 0..c {
        let mut best: Option<(f64, f64)> = None;
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            thresholds[j] = t;
            let score = jaccard_multilabel(gold, &decide(&thresholds))?;
            let better = match best {
                None => true,
                Some((bs, bt)) => score > bs || (score == bs && (t - 0.5).abs() < (bt - 0.5).abs()),
            };
            if better {
                best = Some((score, t));
            }
        }
        thresholds[j] = best.expect("non-empty sweep").1;
    }
    Ok(thresholds)
}
