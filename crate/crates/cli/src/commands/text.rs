use std::path::Path;

use affect_core::dataio::{self, AnyModel, HashtagDoc, SentenceFeatureMatrix, WordVectorTable};
use affect_core::evec::{self, EvecConfig};
use affect_core::features::{self, FeatureBlocks};
use affect_core::Error;
use anyhow::{Context, Result};

use crate::data::{self, Dataset};
use crate::Ctx;

fn vector_table(ctx: &Ctx) -> Result<Option<WordVectorTable>> {
    match &ctx.cfg.paths.evec_vectors {
        Some(p) => Ok(Some(dataio::read_word_vectors(p)?)),
        None => Ok(None),
    }
}

pub fn prep(ctx: &Ctx, dataset: &Path, out: &Path) -> Result<String> {
    let lex = data::lexicons(&ctx.cfg)?;
    let table = vector_table(ctx)?;
    let ds = data::read_dataset(dataset)?;
    let docs: Vec<HashtagDoc> = ds
        .instances()
        .iter()
        .map(|inst| HashtagDoc {
            label: inst.id.clone(),
            text: data::tokenize(&inst.raw_text, table.as_ref(), &lex.word_freq).join(" "),
        })
        .collect();
    dataio::write_hashtag_corpus(out, &docs)?;
    let n_tokens: usize = docs.iter().map(|d| d.text.split_whitespace().count()).sum();
    Ok(format!(
        "prep: {} samples, {n_tokens} tokens -> {}",
        docs.len(),
        out.display()
    ))
}

fn tokenized_corpus(ctx: &Ctx, path: &Path) -> Result<Vec<(Vec<String>, String)>> {
    let lex = data::lexicons(&ctx.cfg)?;
    Ok(dataio::read_hashtag_corpus(path)?
        .into_iter()
        .map(|d| (data::tokenize(&d.text, None, &lex.word_freq), d.label))
        .collect())
}

pub fn evec_train(ctx: &Ctx, corpus: &Path, dev: Option<&Path>, out: &Path, history: Option<&Path>) -> Result<String> {
    let train = tokenized_corpus(ctx, corpus)?;
    let dev = match dev {
        Some(p) => tokenized_corpus(ctx, p)?,
        None => Vec::new(),
    };
    let cfg = EvecConfig {
        seed: ctx.cfg.seed,
        ..ctx.cfg.evec.clone()
    };
    let fit = evec::train_evec(&train, &dev, &cfg)?;
    if let Some(h) = history {
        let rows: Vec<serde_json::Value> = fit
            .history
            .iter()
            .map(|s| {
                serde_json::json!({
                    "epoch": s.epoch,
                    "train_loss": s.train_loss,
                    "dev_loss": s.dev_loss,
                    "dev_accuracy": s.dev_accuracy,
                })
            })
            .collect();
        let text = serde_json::to_string_pretty(&rows).map_err(Error::from)? + "\n";
        std::fs::write(h, text).with_context(|| format!("writing {}", h.display()))?;
    }
    let acc = fit
        .history
        .iter()
        .find(|s| s.epoch == fit.best_epoch)
        .map_or(f64::NAN, |s| s.dev_accuracy);
    let vocab = fit.model.vocab.len();
    data::save(AnyModel::Evec(fit.model), out)?;
    Ok(format!(
        "evec-train: {} docs, vocab {vocab}, best epoch {} (accuracy {acc:.4}) -> {}",
        train.len(),
        fit.best_epoch,
        out.display()
    ))
}

pub fn evec_export(model: &Path, out: &Path) -> Result<String> {
    let AnyModel::Evec(m) = data::load(model, "evec")? else {
        unreachable!("load checks the kind")
    };
    let table = evec::export_vectors(&m);
    dataio::write_word_vectors(out, &table)?;
    Ok(format!(
        "evec-export: {} vectors of dim {} -> {}",
        table.len(),
        table.dim(),
        out.display()
    ))
}

pub fn featurize(
    ctx: &Ctx,
    dataset: &Path,
    out: &Path,
    blocks: Option<Vec<String>>,
    fit_scaler: Option<&Path>,
    scaler: Option<&Path>,
) -> Result<String> {
    let blocks = blocks.unwrap_or_else(|| ctx.cfg.features.blocks.clone());
    let mut sentence = None;
    let mut table = None;
    let mut tweet = false;
    for b in &blocks {
        match b.as_str() {
            "sentence" => {
                let p = ctx
                    .cfg
                    .paths
                    .sentence_features
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput("block 'sentence' needs paths.sentence_features".into()))?;
                sentence = Some(data::read_features(p)?);
            }
            "evec" => {
                let t = vector_table(ctx)?
                    .ok_or_else(|| Error::InvalidInput("block 'evec' needs paths.evec_vectors".into()))?;
                table = Some(t);
            }
            "tweet" => tweet = true,
            other => return Err(Error::InvalidInput(format!("unknown feature block '{other}'")).into()),
        }
    }
    let lex = data::lexicons(&ctx.cfg)?;
    let mut ds: Dataset = data::read_dataset(dataset)?;
    let freq = lex.word_freq.clone();
    for inst in ds.instances_mut() {
        inst.tokens = data::tokenize(&inst.raw_text, table.as_ref(), &freq);
    }
    let spec = FeatureBlocks {
        sentence: sentence.as_ref(),
        evec: table.as_ref(),
        tweet,
    };
    let mut feats = features::assemble(ds.instances(), &spec, &lex)?;
    if let Some(p) = fit_scaler {
        let s = features::fit_scaler(&feats)?;
        feats = features::apply_scaler(&s, &feats)?;
        data::save(AnyModel::Scaler(s), p)?;
    } else if let Some(p) = scaler {
        let AnyModel::Scaler(s) = data::load(p, "scaler")? else {
            unreachable!("load checks the kind")
        };
        feats = features::apply_scaler(&s, &feats)?;
    }
    write_matrix(out, &feats)?;
    let layout: Vec<String> = feats
        .layout
        .iter()
        .map(|b| format!("{}:{}", b.name, b.width()))
        .collect();
    Ok(format!(
        "featurize: {} samples x {} features [{}] -> {}",
        feats.ids.len(),
        feats.width(),
        layout.join(" "),
        out.display()
    ))
}

fn write_matrix(out: &Path, feats: &features::AssembledFeatures) -> Result<()> {
    let mut m = SentenceFeatureMatrix::new(feats.width())?;
    for (i, id) in feats.ids.iter().enumerate() {
        m.insert(id.clone(), feats.matrix.row(i).iter().copied().collect())?;
    }
    dataio::write_sentence_features(out, &m)?;
    Ok(())
}
