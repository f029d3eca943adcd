//! Scoring and the paired-sentence bias audit.

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::dataio::Emotion;
use crate::error::{Error, Result};

/// Sample Pearson correlation. Errors when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!("{} samples", a.len())));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    let r = sab / (saa * sbb).sqrt();
    if !r.is_finite() {
        return Err(Error::UndefinedCorrelation("non-finite input".into()));
    }
    Ok(r.clamp(-1.0, 1.0))
}

/// Mean per-row intersection-over-union; a row where both sets are empty
/// scores 1.
pub fn jaccard_multilabel(gold: &[Vec<bool>], pred: &[Vec<bool>]) -> Result<f64> {
    if gold.len() != pred.len() {
        return Err(Error::Dimension {
            expected: gold.len(),
            got: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::InvalidInput("no rows to score".into()));
    }
    let mut total = 0.0;
    for (g, p) in gold.iter().zip(pred) {
        if g.len() != p.len() {
            return Err(Error::Dimension {
                expected: g.len(),
                got: p.len(),
            });
        }
        let inter = g.iter().zip(p).filter(|(a, b)| **a && **b).count();
        let union = g.iter().zip(p).filter(|(a, b)| **a || **b).count();
        total += if union == 0 { 1.0 } else { inter as f64 / union as f64 };
    }
    Ok(total / gold.len() as f64)
}

pub fn macro_average(scores: &[f64]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::InvalidInput("nothing to average".into()));
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_emotion_pearson: BTreeMap<Emotion, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub macro_pearson: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jaccard: Option<f64>,
    pub n_samples: usize,
}

impl EvalReport {
    /// Per-emotion Pearson plus their macro average. Every emotion needs at
    /// least two samples with non-constant gold and predictions.
    pub fn from_regression(rows: &[(Emotion, f64, f64)]) -> Result<Self> {
        let mut by: BTreeMap<Emotion, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for &(e, gold, pred) in rows {
            let entry = by.entry(e).or_default();
            entry.0.push(gold);
            entry.1.push(pred);
        }
        let mut per = BTreeMap::new();
        for (e, (g, p)) in &by {
            per.insert(*e, pearson(g, p)?);
        }
        let values: Vec<f64> = per.values().copied().collect();
        Ok(EvalReport {
            macro_pearson: Some(macro_average(&values)?),
            per_emotion_pearson: per,
            jaccard: None,
            n_samples: rows.len(),
        })
    }

    pub fn from_multilabel(gold: &[Vec<bool>], pred: &[Vec<bool>]) -> Result<Self> {
        Ok(EvalReport {
            jaccard: Some(jaccard_multilabel(gold, pred)?),
            n_samples: gold.len(),
            ..Default::default()
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples: {}", self.n_samples)?;
        for (e, r) in &self.per_emotion_pearson {
            writeln!(f, "pearson[{e}]: {r:.4}")?;
        }
        if let Some(m) = self.macro_pearson {
            writeln!(f, "pearson[macro]: {m:.4}")?;
        }
        if let Some(j) = self.jaccard {
            writeln!(f, "jaccard: {j:.4}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasAxis {
    Gender,
    Race,
}

impl fmt::Display for BiasAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BiasAxis::Gender => "gender",
            BiasAxis::Race => "race",
        })
    }
}

/// Two sentences that differ only in a name or gendered word. `id_a` is the
/// female (gender) or African-American-name (race) variant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiasPair {
    pub id_a: String,
    pub id_b: String,
    pub axis: BiasAxis,
    pub emotion: Emotion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasResult {
    pub axis: BiasAxis,
    pub emotion: Emotion,
    pub n_pairs: usize,
    /// Mean of `score(a) - score(b)`.
    pub mean_diff: f64,
    /// `mean_diff` as a percentage of the [0, 1] intensity scale.
    pub percent: f64,
}

/// Mean signed score difference per (axis, emotion), ordered by axis then
/// emotion.
pub fn bias_audit(predictions: &IndexMap<String, f64>, pairs: &[BiasPair]) -> Result<Vec<BiasResult>> {
    let mut acc: BTreeMap<(BiasAxis, Emotion), (usize, f64)> = BTreeMap::new();
    for p in pairs {
        let a = predictions
            .get(&p.id_a)
            .ok_or_else(|| Error::MissingId(p.id_a.clone()))?;
        let b = predictions
            .get(&p.id_b)
            .ok_or_else(|| Error::MissingId(p.id_b.clone()))?;
        let e = acc.entry((p.axis, p.emotion)).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += a - b;
    }
    Ok(acc
        .into_iter()
        .map(|((axis, emotion), (n, sum))| {
            let mean_diff = sum / n as f64;
            BiasResult {
                axis,
                emotion,
                n_pairs: n,
                mean_diff,
                percent: mean_diff * 100.0,
            }
        })
        .collect())
}
