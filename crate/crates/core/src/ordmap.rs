//! Regression-to-ordinal mappings.
//!
//! A regression model is trained on the fine-grained intensity and its
//! outputs are turned into ordinal classes by one of three mappers fitted on
//! training `(intensity, class)` pairs:
//!
//! * **naive**: equal-width segments over [0, 1];
//! * **scope**: class boundaries learned from where each class's intensities
//!   lie;
//! * **poly**: a least-squares polynomial from intensity to class, rounded to
//!   the nearest class.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_POLY_DEGREE: usize = 3;
const MIN_POLY_PAIRS: usize = 5;
// reciprocal condition bound for the scaled normal equations
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum MapperVariant {
    Naive {
        lo: f64,
        hi: f64,
    },
    Scope {
        thresholds: Vec<f64>,
    },
    /// Coefficients in increasing power order.
    Poly {
        coeffs: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdinalMapper {
    pub ordinals: Vec<i32>,
    #[serde(flatten)]
    pub variant: MapperVariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MappingMethod {
    Naive,
    Scope,
    Poly,
}

impl MappingMethod {
    pub const ALL: [MappingMethod; 3] = [MappingMethod::Naive, MappingMethod::Scope, MappingMethod::Poly];

    pub fn as_str(self) -> &'static str {
        match self {
            MappingMethod::Naive => "naive",
            MappingMethod::Scope => "scope",
            MappingMethod::Poly => "poly",
        }
    }
}

impl std::str::FromStr for MappingMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "naive" => Ok(MappingMethod::Naive),
            "scope" => Ok(MappingMethod::Scope),
            "poly" => Ok(MappingMethod::Poly),
            other => Err(format!("unknown mapping '{other}' (expected naive, scope or poly)")),
        }
    }
}

impl OrdinalMapper {
    pub fn method(&self) -> MappingMethod {
        match self.variant {
            MapperVariant::Naive { .. } => MappingMethod::Naive,
            MapperVariant::Scope { .. } => MappingMethod::Scope,
            MapperVariant::Poly { .. } => MappingMethod::Poly,
        }
    }

    pub fn apply(&self, pred: f64) -> i32 {
        apply(self, pred)
    }

    pub fn apply_all(&self, preds: &[f64]) -> Vec<i32> {
        preds.iter().map(|&p| apply(self, p)).collect()
    }

    /// Fraction of pairs whose intensity maps to their own class.
    pub fn accuracy(&self, pairs: &[(f64, i32)]) -> f64 {
        if pairs.is_empty() {
            return 0.0;
        }
        let hits = pairs.iter().filter(|(r, o)| apply(self, *r) == *o).count();
        hits as f64 / pairs.len() as f64
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::ModelVersion(format!("ordinal mapper: {m}")));
        if self.ordinals.len() < 2 || self.ordinals.windows(2).any(|w| w[0] >= w[1]) {
            return bad("ordinals must be strictly ascending with at least 2 entries");
        }
        match &self.variant {
            MapperVariant::Naive { lo, hi } if !(lo < hi) => bad("empty range"),
            MapperVariant::Scope { thresholds }
                if thresholds.len() != self.ordinals.len() - 1 || thresholds.windows(2).any(|w| w[0] >= w[1]) =>
            {
                bad("thresholds must be strictly ascending, one fewer than ordinals")
            }
            MapperVariant::Poly { coeffs } if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) => {
                bad("invalid polynomial")
            }
            _ => Ok(()),
        }
    }
}

fn check_ordinals(ordinals: &[i32]) -> Result<Vec<i32>> {
    let set: BTreeSet<i32> = ordinals.iter().copied().collect();
    if set.len() < 2 {
        return Err(Error::InvalidInput("need at least 2 distinct ordinals".into()));
    }
    Ok(set.into_iter().collect())
}

/// Equal-width segments over [0, 1].
pub fn fit_naive(ordinals: &[i32]) -> Result<OrdinalMapper> {
    fit_naive_range(ordinals, 0.0, 1.0)
}

pub fn fit_naive_range(ordinals: &[i32], lo: f64, hi: f64) -> Result<OrdinalMapper> {
    if !(lo < hi) {
        return Err(Error::InvalidInput(format!("empty range [{lo}, {hi}]")));
    }
    Ok(OrdinalMapper {
        ordinals: check_ordinals(ordinals)?,
        variant: MapperVariant::Naive { lo, hi },
    })
}

/// Boundaries between adjacent classes learned from training intensities.
///
/// Separated neighbours get the midpoint of the gap. Overlapping neighbours
/// get the cut, among midpoints of consecutive distinct values, that
/// misclassifies the fewest of their pairs (smallest cut on ties). If the
/// pairwise cuts are not strictly ascending, or classify the training pairs
/// worse than equal-width cuts, all cuts are chosen jointly to minimize total
/// training errors, falling back to the equal-width cuts if those still do
/// better.
pub fn fit_scope(pairs: &[(f64, i32)], ordinals: &[i32]) -> Result<OrdinalMapper> {
    let ordinals = check_ordinals(ordinals)?;
    check_pairs(pairs)?;
    let mut by_class: Vec<Vec<f64>> = vec![Vec::new(); ordinals.len()];
    for &(r, o) in pairs {
        let idx = ordinals
            .binary_search(&o)
            .map_err(|_| Error::InvalidInput(format!("class {o} is not in the ordinal set")))?;
        by_class[idx].push(r);
    }
    let missing: Vec<String> = ordinals
        .iter()
        .zip(&by_class)
        .filter(|(_, v)| v.is_empty())
        .map(|(o, _)| o.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::InvalidInput(format!(
            "classes missing from training pairs: {}",
            missing.join(", ")
        )));
    }

    let scope = |thresholds: Vec<f64>| OrdinalMapper {
        ordinals: ordinals.clone(),
        variant: MapperVariant::Scope { thresholds },
    };
    let k = ordinals.len();
    let naive_cuts = scope((1..k).map(|i| i as f64 / k as f64).collect());
    let naive_acc = naive_cuts.accuracy(pairs);

    let pairwise: Vec<f64> = by_class.windows(2).map(|w| pairwise_cut(&w[0], &w[1])).collect();
    if pairwise.windows(2).all(|w| w[0] < w[1]) {
        let m = scope(pairwise);
        if m.accuracy(pairs) >= naive_acc {
            return Ok(m);
        }
    }
    // crossing or weaker pairwise cuts: optimize all cuts jointly, never
    // doing worse than the equal-width cuts
    let joint = joint_cuts(pairs, &ordinals).map(scope);
    Ok(match joint {
        Ok(m) if m.accuracy(pairs) >= naive_acc => m,
        _ => naive_cuts,
    })
}

fn check_pairs(pairs: &[(f64, i32)]) -> Result<()> {
    if pairs.iter().any(|(r, _)| !r.is_finite()) {
        return Err(Error::InvalidInput("non-finite intensity in pairs".into()));
    }
    Ok(())
}

fn pairwise_cut(lower: &[f64], upper: &[f64]) -> f64 {
    let max_lower = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_upper = upper.iter().copied().fold(f64::INFINITY, f64::min);
    if max_lower < min_upper {
        return (max_lower + min_upper) / 2.0;
    }
    let mut values: Vec<f64> = lower.iter().chain(upper).copied().collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut best = (usize::MAX, f64::NAN);
    for w in values.windows(2) {
        let cut = (w[0] + w[1]) / 2.0;
        let errors = lower.iter().filter(|&&v| v >= cut).count() + upper.iter().filter(|&&v| v < cut).count();
        if errors < best.0 {
            best = (errors, cut);
        }
    }
    best.1
}

/// Strictly ascending cuts over midpoints of consecutive distinct
/// intensities minimizing total misclassification, by dynamic programming.
fn joint_cuts(pairs: &[(f64, i32)], ordinals: &[i32]) -> Result<Vec<f64>> {
    let k = ordinals.len();
    let mut values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let cands: Vec<f64> = values.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
    if cands.len() < k - 1 {
        return Err(Error::InvalidInput(format!(
            "{} distinct intensities cannot separate {k} classes",
            values.len()
        )));
    }
    // slot s lies between cands[s-1] and cands[s]; slot 0 below all cuts
    let m = cands.len();
    let slot_of = |v: f64| cands.partition_point(|&c| c <= v);
    let mut count = vec![vec![0usize; m + 1]; k];
    for &(r, o) in pairs {
        let c = ordinals.binary_search(&o).expect("validated class");
        count[c][slot_of(r)] += 1;
    }
    let total_in_slot: Vec<usize> = (0..=m).map(|s| (0..k).map(|c| count[c][s]).sum()).collect();
    // wrong[c][s] = samples in slots < s that are not class c
    let wrong: Vec<Vec<usize>> = (0..k)
        .map(|c| {
            let mut acc = vec![0usize; m + 2];
            for s in 0..=m {
                acc[s + 1] = acc[s] + total_in_slot[s] - count[c][s];
            }
            acc
        })
        .collect();
    let seg_cost = |c: usize, from: usize, to: usize| wrong[c][to] - wrong[c][from];

    // dp[q][j]: cut q placed at candidate j (slot boundary j+1)
    const INF: usize = usize::MAX / 2;
    let mut dp = vec![vec![INF; m]; k - 1];
    let mut back = vec![vec![usize::MAX; m]; k - 1];
    for j in 0..m {
        dp[0][j] = seg_cost(0, 0, j + 1);
    }
    for q in 1..k - 1 {
        let mut best = (INF, usize::MAX);
        for j in 0..m {
            if j >= 1 {
                let prev = j - 1;
                let v = dp[q - 1][prev].saturating_sub(wrong[q][prev + 1]);
                if dp[q - 1][prev] < INF && v < best.0 {
                    best = (v, prev);
                }
            }
            if best.0 < INF {
                dp[q][j] = best.0 + wrong[q][j + 1];
                back[q][j] = best.1;
            }
        }
    }
    let last = k - 2;
    let mut best_j = 0;
    let mut best_cost = INF;
    for j in 0..m {
        if dp[last][j] >= INF {
            continue;
        }
        let cost = dp[last][j] + seg_cost(k - 1, j + 1, m + 1);
        if cost < best_cost {
            best_cost = cost;
            best_j = j;
        }
    }
    let mut idx = vec![0usize; k - 1];
    idx[last] = best_j;
    for q in (1..k - 1).rev() {
        idx[q - 1] = back[q][idx[q]];
    }
    Ok(idx.into_iter().map(|j| cands[j]).collect())
}

/// Least-squares polynomial from intensity to class (degree 3 by default).
pub fn fit_poly(pairs: &[(f64, i32)], ordinals: &[i32], degree: usize) -> Result<OrdinalMapper> {
    let ordinals = check_ordinals(ordinals)?;
    check_pairs(pairs)?;
    if degree == 0 {
        return Err(Error::InvalidInput("polynomial degree must be at least 1".into()));
    }
    if pairs.len() < MIN_POLY_PAIRS {
        return Err(Error::InvalidInput(format!(
            "polynomial mapping needs at least {MIN_POLY_PAIRS} pairs, got {}",
            pairs.len()
        )));
    }
    let distinct: BTreeSet<u64> = pairs.iter().map(|p| p.0.to_bits()).collect();
    if distinct.len() < 2 {
        return Err(Error::InvalidInput("need at least 2 distinct intensities".into()));
    }

    let cols = degree + 1;
    let v = DMatrix::from_fn(pairs.len(), cols, |i, p| pairs[i].0.powi(p as i32));
    // unit-norm columns before forming the normal equations
    let scale: Vec<f64> = (0..cols)
        .map(|p| {
            let n = v.column(p).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    let vs = DMatrix::from_fn(v.nrows(), cols, |i, p| v[(i, p)] / scale[p]);
    let t = DVector::from_iterator(pairs.len(), pairs.iter().map(|p| p.1 as f64));
    let gram = vs.transpose() * &vs;
    let rhs = vs.transpose() * t;
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("polynomial normal equations are rank deficient".into()))?;
    let diag: Vec<f64> = (0..cols).map(|i| chol.l_dirty()[(i, i)].powi(2)).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > RANK_TOL * max) {
        return Err(Error::Numerical(
            "polynomial normal equations are rank deficient".into(),
        ));
    }
    let c = chol.solve(&rhs);
    let coeffs: Vec<f64> = c.iter().zip(&scale).map(|(c, s)| c / s).collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Numerical("non-finite polynomial coefficients".into()));
    }
    Ok(OrdinalMapper {
        ordinals,
        variant: MapperVariant::Poly { coeffs },
    })
}

pub fn fit(method: MappingMethod, pairs: &[(f64, i32)], ordinals: &[i32]) -> Result<OrdinalMapper> {
    match method {
        MappingMethod::Naive => fit_naive(ordinals),
        MappingMethod::Scope => fit_scope(pairs, ordinals),
        MappingMethod::Poly => fit_poly(pairs, ordinals, DEFAULT_POLY_DEGREE),
    }
}

pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Naive and scope mappers clamp out-of-range inputs to the end segments;
/// the polynomial mapper rounds half away from zero, then clamps to the
/// ordinal range.
pub fn apply(mapper: &OrdinalMapper, pred: f64) -> i32 {
    let ords = &mapper.ordinals;
    let k = ords.len();
    match &mapper.variant {
        MapperVariant::Naive { lo, hi } => {
            let pos = ((pred - lo) / (hi - lo) * k as f64).floor();
            let idx = if pos.is_nan() {
                0.0
            } else {
                pos.clamp(0.0, (k - 1) as f64)
            };
            ords[idx as usize]
        }
        MapperVariant::Scope { thresholds } => ords[thresholds.partition_point(|&t| t <= pred)],
        MapperVariant::Poly { coeffs } => {
            let v = poly_eval(coeffs, pred);
            let lo = ords[0];
            let hi = ords[k - 1];
            let r = if v.is_nan() {
                lo as f64
            } else {
                v.round().clamp(lo as f64, hi as f64)
            };
            let r = r as i32;
            if ords.binary_search(&r).is_ok() {
                r
            } else {
                // non-contiguous ordinal set: nearest member, larger on ties
                *ords
                    .iter()
                    .min_by(|a, b| {
                        let da = (**a as f64 - v).abs();
                        let db = (**b as f64 - v).abs();
                        da.total_cmp(&db).then(b.cmp(a))
                    })
                    .expect("non-empty ordinals")
            }
        }
    }
}

/// Whether the fitted polynomial is non-decreasing on [0, 1], judged by the
/// sign of its derivative on a grid.
pub fn poly_is_monotone(mapper: &OrdinalMapper) -> bool {
    match &mapper.variant {
        MapperVariant::Poly { coeffs } => {
            let deriv: Vec<f64> = coeffs.iter().enumerate().skip(1).map(|(p, c)| p as f64 * c).collect();
            (0..=200).all(|i| poly_eval(&deriv, i as f64 / 200.0) >= -1e-12)
        }
        _ => true,
    }
}
