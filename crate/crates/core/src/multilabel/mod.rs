//! Multi-label emotion classification.
//!
//! Two model families are provided: a linear regressor whose outputs are
//! smoothed over a label graph built from co-occurrence statistics, and
//! ensembles of logistic classifier chains over shuffled label orders. Their
//! per-label scores can be blended by [`ensemble_multilabel`].

mod chain;
mod graph;
mod rlr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use chain::{
    predict_chain, predict_chain_ensemble, train_chain, train_chain_ensemble, Chain, ChainConfig, ChainEnsemble,
    LogisticUnit,
};
pub use graph::{cooccurrence, laplacian, CooccurrenceStats, LabelGraph};
pub use rlr::{
    predict_rlr, predict_rlr_batch, rlr_gradient, rlr_loss, train_rlr, tune_thresholds, MultiLabelModel, RlrConfig,
    RlrFit,
};

/// Label rows as a 0/1 matrix, one row per sample.
pub fn label_matrix(y: &[Vec<bool>]) -> Result<DMatrix<f64>> {
    let c = y.first().map_or(0, Vec::len);
    if let Some(row) = y.iter().find(|r| r.len() != c) {
        return Err(Error::Dimension {
            expected: c,
            got: row.len(),
        });
    }
    Ok(DMatrix::from_fn(y.len(), c, |i, j| if y[i][j] { 1.0 } else { 0.0 }))
}

/// Weighted blend of RLR scores and chain probabilities, thresholded per
/// label.
pub fn ensemble_multilabel(
    rlr_scores: &[f64],
    chain_probs: &[f64],
    weights: (f64, f64),
    thresholds: &[f64],
) -> Result<Vec<bool>> {
    let c = rlr_scores.len();
    for got in [chain_probs.len(), thresholds.len()] {
        if got != c {
            return Err(Error::Dimension { expected: c, got });
        }
    }
    let total = weights.0 + weights.1;
    if total == 0.0 || !total.is_finite() {
        return Err(Error::InvalidInput(
            "ensemble weights must have a non-zero finite sum".into(),
        ));
    }
    Ok((0..c)
        .map(|j| (weights.0 * rlr_scores[j] + weights.1 * chain_probs[j]) / total >= thresholds[j])
        .collect())
}
