use std::path::Path;

use affect_core::dataio::{self, AnyModel, LabeledInstance};
use affect_core::eval::jaccard_multilabel;
use affect_core::multilabel::{
    cooccurrence, ensemble_multilabel, label_matrix, laplacian, predict_chain_ensemble, predict_rlr_batch,
    train_chain_ensemble, tune_thresholds, ChainConfig, RlrConfig,
};
use affect_core::{multilabel, Error};
use anyhow::Result;
use nalgebra::DMatrix;

use crate::data;
use crate::Ctx;

/// Features for `data` with a trailing constant column for the intercept.
fn design(features: &Path, data: &[LabeledInstance]) -> Result<DMatrix<f64>> {
    let feats = data::read_features(features)?;
    let x = data::feature_rows(&feats, data.iter().map(|d| d.id.as_str()))?;
    let n = x.ncols();
    Ok(x.insert_column(n, 1.0))
}

fn plain(features: &Path, data: &[LabeledInstance]) -> Result<DMatrix<f64>> {
    let feats = data::read_features(features)?;
    data::feature_rows(&feats, data.iter().map(|d| d.id.as_str()))
}

fn gold(data: &[LabeledInstance]) -> Vec<Vec<bool>> {
    data.iter().map(|d| d.multilabels.clone().unwrap_or_default()).collect()
}

pub fn train_rlr(
    ctx: &Ctx,
    train: &Path,
    features: &Path,
    dev: Option<&Path>,
    dev_features: Option<&Path>,
    out: &Path,
) -> Result<String> {
    let ml = &ctx.cfg.multilabel;
    let (labels, ds) = data::read_multi(train)?;
    let x = design(features, &ds)?;
    let y = gold(&ds);
    let graph = laplacian(&cooccurrence(&y, labels.len())?.as_f64())?;
    let cfg = RlrConfig {
        lambda: ml.lambda,
        lr: ml.lr,
        iters: ml.iters,
        seed: ctx.cfg.seed,
    };
    let fit = multilabel::train_rlr(&x, &label_matrix(&y)?, &graph.l, &cfg)?;
    let mut model = fit.model;
    model.labels = labels.clone();
    model.thresholds = vec![ml.threshold; labels.len()];
    let mut note = String::new();
    if let (Some(dev), Some(dev_features)) = (dev, dev_features) {
        let (dev_labels, dev_ds) = data::read_multi(dev)?;
        if dev_labels != labels {
            return Err(Error::InvalidInput("train and dev label columns differ".into()).into());
        }
        let dx = design(dev_features, &dev_ds)?;
        let dy = gold(&dev_ds);
        if ml.tune_thresholds {
            let (scores, _) = predict_rlr_batch(&model, &dx)?;
            model.thresholds = tune_thresholds(&scores, &dy)?;
        }
        let (_, pred) = predict_rlr_batch(&model, &dx)?;
        note = format!(", dev jaccard {:.4}", jaccard_multilabel(&dy, &pred)?);
    }
    let final_loss = fit.losses.last().copied().unwrap_or(f64::NAN);
    data::save(AnyModel::MultiLabel(model), out)?;
    Ok(format!(
        "ml-train-rlr: {} samples, {} labels, {} steps, loss {final_loss:.6}{note} -> {}",
        ds.len(),
        labels.len(),
        fit.losses.len().saturating_sub(1),
        out.display()
    ))
}

pub fn train_cc(ctx: &Ctx, train: &Path, features: &Path, out: &Path) -> Result<String> {
    let ml = &ctx.cfg.multilabel;
    let (labels, ds) = data::read_multi(train)?;
    let x = plain(features, &ds)?;
    let y = gold(&ds);
    let cfg = ChainConfig {
        n_chains: ml.chains,
        l2: ml.chain_l2,
        lr: ml.chain_lr,
        iters: ml.chain_iters,
        seed: ctx.cfg.seed,
        threshold: ml.threshold,
    };
    let ens = train_chain_ensemble(&x, &y, &labels, &cfg)?;
    let n_chains = ens.chains.len();
    data::save(AnyModel::Chains(ens), out)?;
    Ok(format!(
        "ml-train-cc: {} samples, {} labels, {n_chains} chains -> {}",
        ds.len(),
        labels.len(),
        out.display()
    ))
}

pub fn predict(
    ctx: &Ctx,
    dataset: &Path,
    features: &Path,
    rlr: Option<&Path>,
    chains: Option<&Path>,
    weights: Option<Vec<f64>>,
    out: &Path,
) -> Result<String> {
    let (labels, mut ds) = data::read_multi(dataset)?;
    let rlr_out = match rlr {
        Some(p) => {
            let AnyModel::MultiLabel(m) = data::load(p, "rlr")? else {
                unreachable!("load checks the kind")
            };
            if m.labels != labels {
                return Err(Error::InvalidInput("model labels differ from the dataset header".into()).into());
            }
            let (scores, decided) = predict_rlr_batch(&m, &design(features, &ds)?)?;
            Some((m.thresholds, scores, decided))
        }
        None => None,
    };
    let chain_out = match chains {
        Some(p) => {
            let AnyModel::Chains(ens) = data::load(p, "chains")? else {
                unreachable!("load checks the kind")
            };
            if ens.labels != labels {
                return Err(Error::InvalidInput("model labels differ from the dataset header".into()).into());
            }
            let x = plain(features, &ds)?;
            let rows = (0..x.nrows())
                .map(|i| {
                    let row: Vec<f64> = x.row(i).iter().copied().collect();
                    predict_chain_ensemble(&ens, &row)
                })
                .collect::<affect_core::Result<Vec<_>>>()?;
            Some(rows)
        }
        None => None,
    };
    let (mode, pred): (&str, Vec<Vec<bool>>) = match (rlr_out, chain_out) {
        (Some((_, _, decided)), None) => ("rlr", decided),
        (None, Some(rows)) => ("chains", rows.into_iter().map(|(_, d)| d).collect()),
        (Some((thresholds, scores, _)), Some(rows)) => {
            let w = weights.unwrap_or_else(|| ctx.cfg.multilabel.weights.to_vec());
            let blended = scores
                .iter()
                .zip(&rows)
                .map(|(s, (p, _))| ensemble_multilabel(s, p, (w[0], w[1]), &thresholds))
                .collect::<affect_core::Result<Vec<_>>>()?;
            ("blend", blended)
        }
        (None, None) => return Err(Error::InvalidInput("give --rlr, --chains or both".into()).into()),
    };
    let gold_known = ds
        .iter()
        .all(|d| d.multilabels.as_ref().is_some_and(|m| m.len() == labels.len()));
    let score = if gold_known {
        format!(", jaccard vs input {:.4}", jaccard_multilabel(&gold(&ds), &pred)?)
    } else {
        String::new()
    };
    for (inst, p) in ds.iter_mut().zip(pred) {
        inst.multilabels = Some(p);
    }
    dataio::write_multilabel_dataset(out, &labels, &ds)?;
    Ok(format!(
        "ml-predict: {} samples ({mode}){score} -> {}",
        ds.len(),
        out.display()
    ))
}
