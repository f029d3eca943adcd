use std::collections::HashMap;
use std::path::{Path, PathBuf};

use affect_core::dataio::{self, AnyModel, DatasetKind, Emotion};
use affect_core::eval::pearson;
use affect_core::ordmap::{self, MappingMethod, OrdinalMapper};
use affect_core::regress::{self, ensemble_average, greedy_ensemble_select, score_grid, RegressorConfig};
use affect_core::Error;
use anyhow::{Context, Result};
use nalgebra::DMatrix;

use crate::data;
use crate::Ctx;

fn labelled(path: &Path, features: &Path) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let ds = data::read_kind(path, DatasetKind::Reg)?;
    let feats = data::read_features(features)?;
    let x = data::feature_rows(&feats, ds.iter().map(|d| d.id.as_str()))?;
    let y = ds.iter().map(|d| d.reg_label.unwrap_or(f64::NAN)).collect();
    Ok((x, y))
}

fn stack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}

pub fn reg_train(
    ctx: &Ctx,
    train: &Path,
    train_features: &Path,
    dev: &Path,
    dev_features: &Path,
    out: &Path,
    scores_out: Option<&Path>,
) -> Result<String> {
    let (tx, ty) = labelled(train, train_features)?;
    let (dx, dy) = labelled(dev, dev_features)?;
    if tx.ncols() != dx.ncols() {
        return Err(Error::Dimension {
            expected: tx.ncols(),
            got: dx.ncols(),
        }
        .into());
    }
    let grid: Vec<RegressorConfig> = match &ctx.cfg.regression.grid {
        Some(p) => regress::read_grid(p)?,
        None => regress::default_grid(tx.ncols()),
    };
    let (scores, best) = score_grid(&tx, &ty, &dx, &dy, &grid)?;
    if !scores[best].dev_pearson.is_finite() {
        return Err(Error::InvalidInput("no grid point could be scored on dev".into()).into());
    }
    let winner = scores[best].config;
    let model = if ctx.cfg.merge_train_dev {
        let all_y: Vec<f64> = ty.iter().chain(&dy).copied().collect();
        winner.fit(&stack(&tx, &dx), &all_y)?
    } else {
        winner.fit(&tx, &ty)?
    };
    if let Some(p) = scores_out {
        let text = serde_json::to_string_pretty(&scores).map_err(Error::from)? + "\n";
        std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    let method = serde_json::to_string(&winner).map_err(Error::from)?;
    data::save(AnyModel::Kernel(model), out)?;
    Ok(format!(
        "reg-train: {} configs, best dev pearson {:.4} {method} -> {}",
        scores.len(),
        scores[best].dev_pearson,
        out.display()
    ))
}

pub fn reg_predict(model: &Path, features: &Path, out: &Path, clip: bool) -> Result<String> {
    let AnyModel::Kernel(m) = data::load(model, "kernel")? else {
        unreachable!("load checks the kind")
    };
    let feats = data::read_features(features)?;
    let ids: Vec<&str> = feats.iter().map(|(id, _)| id).collect();
    let x = data::feature_rows(&feats, ids.iter().copied())?;
    let mut pred = m.predict(&x)?;
    if clip {
        pred = regress::clip_unit(&pred);
    }
    dataio::write_predictions(out, ids.iter().copied().zip(pred.iter().copied()))?;
    Ok(format!("reg-predict: {} predictions -> {}", pred.len(), out.display()))
}

fn name_of(p: &Path) -> String {
    p.display().to_string()
}

pub fn reg_ensemble(predictions: &[PathBuf], out: &Path, select_with: Option<&Path>) -> Result<String> {
    let first = dataio::read_predictions(&predictions[0])?;
    let ids: Vec<String> = first.keys().cloned().collect();
    let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
    let mut sets = Vec::with_capacity(predictions.len());
    for p in predictions {
        let map: HashMap<String, f64> = dataio::read_predictions(p)?.into_iter().collect();
        let v = data::align(&map, &id_refs).with_context(|| format!("aligning {}", p.display()))?;
        sets.push((name_of(p), v));
    }
    let chosen: Vec<String> = match select_with {
        Some(gold_path) => {
            let gold = data::read_kind(gold_path, DatasetKind::Reg)?;
            let gold_ids: Vec<&str> = gold.iter().map(|d| d.id.as_str()).collect();
            let gold_y: Vec<f64> = gold.iter().map(|d| d.reg_label.unwrap_or(f64::NAN)).collect();
            let candidates = sets
                .iter()
                .map(|(name, v)| {
                    let map: HashMap<String, f64> = ids.iter().cloned().zip(v.iter().copied()).collect();
                    Ok((name.clone(), data::align(&map, &gold_ids)?))
                })
                .collect::<Result<Vec<_>>>()?;
            greedy_ensemble_select(&candidates, &gold_y)?
        }
        None => sets.iter().map(|(n, _)| n.clone()).collect(),
    };
    let members: Vec<&[f64]> = chosen
        .iter()
        .map(|n| {
            sets.iter()
                .find(|(m, _)| m == n)
                .map(|(_, v)| v.as_slice())
                .expect("chosen from sets")
        })
        .collect();
    let avg = ensemble_average(&members)?;
    dataio::write_predictions(out, id_refs.iter().copied().zip(avg.iter().copied()))?;
    Ok(format!(
        "reg-ensemble: {} of {} members [{}] -> {}",
        chosen.len(),
        sets.len(),
        chosen.join(", "),
        out.display()
    ))
}

fn single_emotion(data: &[affect_core::dataio::LabeledInstance], path: &Path) -> Result<Emotion> {
    let mut seen = data.iter().filter_map(|d| d.emotion);
    let e = seen
        .next()
        .ok_or_else(|| Error::InvalidInput(format!("{} has no rows", path.display())))?;
    if seen.any(|o| o != e) {
        return Err(Error::InvalidInput(format!("{} mixes affect dimensions", path.display())).into());
    }
    Ok(e)
}

/// Gold classes of an ordinal dataset, keyed by id.
fn classes(path: &Path) -> Result<(Emotion, Vec<(String, i32)>)> {
    let ds = data::read_kind(path, DatasetKind::Oc)?;
    let e = single_emotion(&ds, path)?;
    Ok((
        e,
        ds.into_iter()
            .map(|d| (d.id, d.ord_label.unwrap_or(i32::MIN)))
            .collect(),
    ))
}

fn mapped_pearson(mapper: &OrdinalMapper, preds: &HashMap<String, f64>, gold: &[(String, i32)]) -> Result<f64> {
    let ids: Vec<&str> = gold.iter().map(|(id, _)| id.as_str()).collect();
    let p = data::align(preds, &ids)?;
    let mapped: Vec<f64> = mapper.apply_all(&p).into_iter().map(f64::from).collect();
    let g: Vec<f64> = gold.iter().map(|(_, c)| f64::from(*c)).collect();
    // a constant mapping has no correlation and loses every comparison
    Ok(pearson(&mapped, &g).unwrap_or(f64::NEG_INFINITY))
}

pub fn ordmap_fit(
    ctx: &Ctx,
    train_intensity: &Path,
    train: &Path,
    dev_pred: &[PathBuf],
    dev: Option<&Path>,
    method: Option<String>,
    out: &Path,
) -> Result<String> {
    let (emotion, gold) = classes(train)?;
    let intensity: HashMap<String, f64> = data::read_intensities(train_intensity)?.into_iter().collect();
    let ids: Vec<&str> = gold.iter().map(|(id, _)| id.as_str()).collect();
    let r = data::align(&intensity, &ids)?;
    let pairs: Vec<(f64, i32)> = r.into_iter().zip(gold.iter().map(|(_, c)| *c)).collect();
    let ordinals = emotion.ordinals();

    let method = method.unwrap_or_else(|| ctx.cfg.mapping.clone());
    if method != "auto" {
        let m: MappingMethod = method.parse().map_err(Error::InvalidInput)?;
        let mapper = ordmap::fit(m, &pairs, &ordinals)?;
        let acc = mapper.accuracy(&pairs);
        data::save(AnyModel::Ordinal(mapper), out)?;
        return Ok(format!(
            "ordmap-fit: {emotion} {} train accuracy {acc:.4} -> {}",
            m.as_str(),
            out.display()
        ));
    }

    let dev = dev.ok_or_else(|| Error::InvalidInput("auto mapping needs --dev".into()))?;
    if dev_pred.is_empty() {
        return Err(Error::InvalidInput("auto mapping needs at least one --dev-pred".into()).into());
    }
    let (_, dev_gold) = classes(dev)?;
    let mappers = MappingMethod::ALL
        .iter()
        .map(|&m| Ok((m, ordmap::fit(m, &pairs, &ordinals)?)))
        .collect::<Result<Vec<_>>>()?;
    // default: best ensemble only; submission strategy: every prediction set
    let candidates = if ctx.submission_strategy {
        dev_pred
    } else {
        &dev_pred[..1]
    };
    let mut best: Option<(f64, usize, usize)> = None;
    for (fi, file) in candidates.iter().enumerate() {
        let preds: HashMap<String, f64> = dataio::read_predictions(file)?.into_iter().collect();
        for (mi, (_, mapper)) in mappers.iter().enumerate() {
            let score = mapped_pearson(mapper, &preds, &dev_gold)?;
            if best.is_none_or(|(s, _, _)| score > s) {
                best = Some((score, fi, mi));
            }
        }
    }
    let (score, fi, mi) = best.expect("at least one candidate");
    let (m, mapper) = mappers.into_iter().nth(mi).expect("index in range");
    data::save(AnyModel::Ordinal(mapper), out)?;
    Ok(format!(
        "ordmap-fit: {emotion} auto chose {} on {} (dev pearson {score:.4}) -> {}",
        m.as_str(),
        candidates[fi].display(),
        out.display()
    ))
}

pub fn ordmap_apply(mapper: &Path, predictions: &Path, out: &Path) -> Result<String> {
    let AnyModel::Ordinal(m) = data::load(mapper, "ordmap")? else {
        unreachable!("load checks the kind")
    };
    let preds = dataio::read_predictions(predictions)?;
    let rows: Vec<(&str, f64)> = preds
        .iter()
        .map(|(id, &v)| (id.as_str(), f64::from(m.apply(v))))
        .collect();
    dataio::write_predictions(out, rows.iter().copied())?;
    Ok(format!(
        "ordmap-apply: {} {} predictions -> {}",
        rows.len(),
        m.method().as_str(),
        out.display()
    ))
}
