use std::collections::HashMap;
use std::path::Path;

use affect_core::dataio::{self, DatasetKind};
use affect_core::eval::{self, EvalReport};
use affect_core::Error;
use anyhow::{Context, Result};

use crate::data::{self, Dataset};

fn write_json(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn eval(gold: &Path, predictions: &Path, json: Option<&Path>) -> Result<String> {
    let report = match data::read_dataset(gold)? {
        Dataset::Intensity(kind, rows) => {
            let preds: HashMap<String, f64> = data::read_intensities(predictions)?.into_iter().collect();
            let ids: Vec<&str> = rows.iter().map(|d| d.id.as_str()).collect();
            let p = data::align(&preds, &ids)?;
            let triples = rows
                .iter()
                .zip(p)
                .map(|(d, p)| {
                    let e = d
                        .emotion
                        .ok_or_else(|| Error::InvalidInput(format!("'{}' has no affect dimension", d.id)))?;
                    let g = match kind {
                        DatasetKind::Reg => d.reg_label.unwrap_or(f64::NAN),
                        DatasetKind::Oc => d.ord_label.map_or(f64::NAN, f64::from),
                    };
                    Ok((e, g, p))
                })
                .collect::<affect_core::Result<Vec<_>>>()?;
            EvalReport::from_regression(&triples)?
        }
        Dataset::Multi(labels, rows) => {
            let (pred_labels, pred_rows) = data::read_multi(predictions)?;
            if pred_labels != labels {
                return Err(Error::InvalidInput("prediction label columns differ from gold".into()).into());
            }
            let by_id: HashMap<&str, &Vec<bool>> = pred_rows
                .iter()
                .filter_map(|d| d.multilabels.as_ref().map(|m| (d.id.as_str(), m)))
                .collect();
            let mut g = Vec::with_capacity(rows.len());
            let mut p = Vec::with_capacity(rows.len());
            for d in &rows {
                let hit = by_id.get(d.id.as_str()).ok_or_else(|| Error::MissingId(d.id.clone()))?;
                p.push((*hit).clone());
                g.push(d.multilabels.clone().unwrap_or_default());
            }
            EvalReport::from_multilabel(&g, &p)?
        }
    };
    if let Some(path) = json {
        write_json(path, &report.to_json()?)?;
    }
    let mut parts = vec![format!("samples {}", report.n_samples)];
    if let Some(m) = report.macro_pearson {
        parts.push(format!("pearson {m:.4}"));
        if report.per_emotion_pearson.len() > 1 {
            for (e, r) in &report.per_emotion_pearson {
                parts.push(format!("{e} {r:.4}"));
            }
        }
    }
    if let Some(j) = report.jaccard {
        parts.push(format!("jaccard {j:.4}"));
    }
    Ok(format!("eval: {}", parts.join(", ")))
}

pub fn bias_audit(predictions: &Path, pairs: &Path, json: Option<&Path>) -> Result<String> {
    let preds = dataio::read_predictions(predictions)?;
    let pairs = dataio::read_bias_pairs(pairs)?;
    let results = eval::bias_audit(&preds, &pairs)?;
    if let Some(path) = json {
        let text = serde_json::to_string_pretty(&results).map_err(Error::from)? + "\n";
        write_json(path, &text)?;
    }
    let parts: Vec<String> = results
        .iter()
        .map(|r| format!("{}/{} {:+.2}% (n={})", r.axis, r.emotion, r.percent, r.n_pairs))
        .collect();
    Ok(format!("bias-audit: {}", parts.join(", ")))
}
