use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GRAD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    pub n_chains: usize,
    pub l2: f64,
    pub lr: f64,
    pub iters: usize,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            n_chains: 10,
            l2: 1e-3,
            lr: 1.0,
            iters: 2000,
            seed: 0,
            threshold: 0.5,
        }
    }
}

/// One binary logistic classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticUnit {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticUnit {
    pub fn prob(&self, x: &[f64], extra: &[f64]) -> f64 {
        let z: f64 = self
            .weights
            .iter()
            .zip(x.iter().chain(extra))
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.bias;
        sigmoid(z)
    }
}

/// Classifiers in chain order; the j-th also reads the j earlier labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub order: Vec<usize>,
    pub units: Vec<LogisticUnit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainEnsemble {
    pub labels: Vec<String>,
    pub n_features: usize,
    pub threshold: f64,
    pub chains: Vec<Chain>,
}

impl ChainEnsemble {
    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let c = self.labels.len();
        let bad = |m: String| Err(Error::ModelVersion(format!("chain ensemble: {m}")));
        if self.chains.is_empty() || !self.threshold.is_finite() {
            return bad("no chains or non-finite threshold".into());
        }
        for (k, ch) in self.chains.iter().enumerate() {
            let mut seen = ch.order.clone();
            seen.sort_unstable();
            if seen != (0..c).collect::<Vec<_>>() || ch.units.len() != c {
                return bad(format!("chain {k} order is not a permutation of {c} labels"));
            }
            for (j, u) in ch.units.iter().enumerate() {
                if u.weights.len() != self.n_features + j {
                    return bad(format!("chain {k} unit {j} has {} weights", u.weights.len()));
                }
                if u.weights.iter().any(|w| !w.is_finite()) || !u.bias.is_finite() {
                    return bad(format!("chain {k} unit {j} has non-finite weights"));
                }
            }
        }
        Ok(())
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// L2-regularized logistic regression by batch gradient descent; the bias is
/// not penalized. With `intercept_only` the weights stay at zero.
fn fit_logistic(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    l2: f64,
    lr: f64,
    iters: usize,
    intercept_only: bool,
) -> LogisticUnit {
    let (m, n) = x.shape();
    let mut w = DVector::<f64>::zeros(n);
    let mut b = 0.0;
    let inv_m = 1.0 / m as f64;
    for _ in 0..iters {
        let z = x * &w;
        let r = DVector::from_iterator(m, z.iter().zip(y.iter()).map(|(z, y)| sigmoid(z + b) - y));
        let gb = r.sum() * inv_m;
        let gw = if intercept_only {
            DVector::zeros(n)
        } else {
            x.tr_mul(&r) * inv_m + &w * l2
        };
        if (gw.norm_squared() + gb * gb).sqrt() < GRAD_TOL {
            break;
        }
        w -= gw * lr;
        b -= gb * lr;
    }
    LogisticUnit {
        weights: w.iter().copied().collect(),
        bias: b,
    }
}

/// Trains one chain with teacher forcing: the classifier at position j sees
/// `x` followed by the true labels at `order[0..j]`.
pub fn train_chain(x: &DMatrix<f64>, y: &[Vec<bool>], order: &[usize], cfg: &ChainConfig) -> Result<Chain> {
    let (m, n) = x.shape();
    let c = order.len();
    if y.len() != m {
        return Err(Error::Dimension {
            expected: m,
            got: y.len(),
        });
    }
    if m == 0 {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    if let Some(r) = y.iter().find(|r| r.len() != c) {
        return Err(Error::Dimension {
            expected: c,
            got: r.len(),
        });
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..c).collect::<Vec<_>>() {
        return Err(Error::InvalidInput(format!(
            "order {order:?} is not a permutation of 0..{c}"
        )));
    }
    if !(cfg.lr > 0.0 && cfg.l2 >= 0.0) {
        return Err(Error::InvalidInput(
            "chain lr must be positive and l2 non-negative".into(),
        ));
    }
    let bit = |v: bool| if v { 1.0 } else { 0.0 };
    let units = (0..c)
        .into_par_iter()
        .map(|j| {
            let label = order[j];
            let inputs = DMatrix::from_fn(m, n + j, |i, k| if k < n { x[(i, k)] } else { bit(y[i][order[k - n]]) });
            let target = DVector::from_iterator(m, y.iter().map(|r| bit(r[label])));
            let constant = y.iter().all(|r| r[label] == y[0][label]);
            fit_logistic(&inputs, &target, cfg.l2, cfg.lr, cfg.iters, constant)
        })
        .collect();
    Ok(Chain {
        order: order.to_vec(),
        units,
    })
}

/// Per-label probabilities in label index order. Each classifier receives
/// the chain's own hard decisions (p ≥ 0.5) for earlier labels.
pub fn predict_chain(chain: &Chain, x: &[f64]) -> Vec<f64> {
    let c = chain.order.len();
    let mut probs = vec![0.0; c];
    let mut fed = Vec::with_capacity(c);
    for (unit, &label) in chain.units.iter().zip(&chain.order) {
        let p = unit.prob(x, &fed);
        probs[label] = p;
        fed.push(if p >= 0.5 { 1.0 } else { 0.0 });
    }
    probs
}

/// Trains `cfg.n_chains` chains over orders shuffled with seed `cfg.seed + k`.
pub fn train_chain_ensemble(
    x: &DMatrix<f64>,
    y: &[Vec<bool>],
    labels: &[String],
    cfg: &ChainConfig,
) -> Result<ChainEnsemble> {
    if cfg.n_chains == 0 {
        return Err(Error::InvalidInput("need at least one chain".into()));
    }
    let c = labels.len();
    let chains = (0..cfg.n_chains)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(k as u64));
            let mut order: Vec<usize> = (0..c).collect();
            order.shuffle(&mut rng);
            train_chain(x, y, &order, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChainEnsemble {
        labels: labels.to_vec(),
        n_features: x.ncols(),
        threshold: cfg.threshold,
        chains,
    })
}

/// Mean chain probabilities and their thresholded labels.
pub fn predict_chain_ensemble(ens: &ChainEnsemble, x: &[f64]) -> Result<(Vec<f64>, Vec<bool>)> {
    if x.len() != ens.n_features {
        return Err(Error::Dimension {
            expected: ens.n_features,
            got: x.len(),
        });
    }
    let c = ens.n_labels();
    let mut mean = vec![0.0; c];
    for ch in &ens.chains {
        for (m, p) in mean.iter_mut().zip(predict_chain(ch, x)) {
            *m += p;
        }
    }
    let k = ens.chains.len() as f64;
    mean.iter_mut().for_each(|m| *m /= k);
    let labels = mean.iter().map(|&p| p >= ens.threshold).collect();
    Ok((mean, labels))
}
