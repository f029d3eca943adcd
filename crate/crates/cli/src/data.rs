//! Loading helpers shared by the commands.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use affect_core::dataio::{
    self, load_model, persist_model, AnyModel, DatasetKind, LabeledInstance, LexiconSet, SentenceFeatureMatrix,
    WordFreq, WordVectorTable,
};
use affect_core::textprep::{self, Vocabulary};
use affect_core::Error;
use anyhow::{Context, Result};
use nalgebra::DMatrix;

use crate::config::PipelineConfig;

/// A dataset in any of the three labelled formats.
pub enum Dataset {
    Intensity(DatasetKind, Vec<LabeledInstance>),
    Multi(Vec<String>, Vec<LabeledInstance>),
}

impl Dataset {
    pub fn instances(&self) -> &[LabeledInstance] {
        match self {
            Dataset::Intensity(_, d) | Dataset::Multi(_, d) => d,
        }
    }

    pub fn instances_mut(&mut self) -> &mut [LabeledInstance] {
        match self {
            Dataset::Intensity(_, d) | Dataset::Multi(_, d) => d,
        }
    }
}

fn header(path: &Path) -> Result<String> {
    let f = fs::File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut line = String::new();
    BufReader::new(f).read_line(&mut line).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(line.trim_end_matches(['\n', '\r']).to_string())
}

/// Picks the reader from the fourth header column.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let head = header(path)?;
    let fourth = head.split('\t').nth(3).map(str::trim);
    Ok(match fourth {
        Some("Intensity Score") => Dataset::Intensity(
            DatasetKind::Reg,
            dataio::read_intensity_dataset(path, DatasetKind::Reg)?,
        ),
        Some("Intensity Class") => {
            Dataset::Intensity(DatasetKind::Oc, dataio::read_intensity_dataset(path, DatasetKind::Oc)?)
        }
        _ => {
            let (labels, data) = dataio::read_multilabel_dataset(path)?;
            Dataset::Multi(labels, data)
        }
    })
}

pub fn read_kind(path: &Path, kind: DatasetKind) -> Result<Vec<LabeledInstance>> {
    match read_dataset(path)? {
        Dataset::Intensity(k, d) if k == kind => Ok(d),
        _ => Err(Error::InvalidInput(format!(
            "{} is not a {} dataset",
            path.display(),
            match kind {
                DatasetKind::Reg => "regression",
                DatasetKind::Oc => "ordinal-class",
            }
        ))
        .into()),
    }
}

pub fn read_multi(path: &Path) -> Result<(Vec<String>, Vec<LabeledInstance>)> {
    match read_dataset(path)? {
        Dataset::Multi(labels, d) => Ok((labels, d)),
        Dataset::Intensity(..) => {
            Err(Error::InvalidInput(format!("{} is not a multi-label dataset", path.display())).into())
        }
    }
}

/// Scores keyed by id, from a prediction file or from the label column of
/// an intensity dataset.
pub fn read_intensities(path: &Path) -> Result<Vec<(String, f64)>> {
    if header(path)?.split('\t').count() == 4 {
        if let Dataset::Intensity(kind, data) = read_dataset(path)? {
            return Ok(data
                .into_iter()
                .map(|d| {
                    let v = match kind {
                        DatasetKind::Reg => d.reg_label.unwrap_or(f64::NAN),
                        DatasetKind::Oc => d.ord_label.map_or(f64::NAN, f64::from),
                    };
                    (d.id, v)
                })
                .collect());
        }
    }
    Ok(dataio::read_predictions(path)?.into_iter().collect())
}

pub fn lexicons(cfg: &PipelineConfig) -> Result<LexiconSet> {
    let mut lex = LexiconSet::with_defaults();
    if let Some(p) = &cfg.paths.emoji_lexicon {
        lex.emoji_valence = dataio::read_emoji_lexicon(p)?;
    }
    if let Some(p) = &cfg.paths.emoticon_lexicon {
        (lex.pos_emoticons, lex.neg_emoticons) = dataio::read_emoticon_lexicon(p)?;
    }
    if let Some(p) = &cfg.paths.word_freq {
        lex.word_freq = dataio::read_word_freq(p)?;
    }
    Ok(lex)
}

/// Tokens known to either the word-vector table or the frequency table are
/// kept whole; everything else goes through the segmenter.
pub struct TokenVocab<'a> {
    pub table: Option<&'a WordVectorTable>,
    pub freq: &'a WordFreq,
}

impl Vocabulary for TokenVocab<'_> {
    fn contains_token(&self, token: &str) -> bool {
        self.freq.contains(token) || self.table.is_some_and(|t| t.contains(token))
    }
}

pub fn tokenize(text: &str, table: Option<&WordVectorTable>, freq: &WordFreq) -> Vec<String> {
    textprep::normalize_tokenize(text, &TokenVocab { table, freq }, freq)
}

pub fn read_features(path: &Path) -> Result<SentenceFeatureMatrix> {
    Ok(dataio::read_sentence_features(path)?)
}

/// Rows of `features` for `ids`, in that order.
pub fn feature_rows<'a, I>(features: &SentenceFeatureMatrix, ids: I) -> Result<DMatrix<f64>>
where
    I: IntoIterator<Item = &'a str>,
{
    let rows: Vec<&[f64]> = ids
        .into_iter()
        .map(|id| features.get(id).ok_or_else(|| Error::MissingId(id.to_string())))
        .collect::<affect_core::Result<_>>()?;
    let dim = features.dim();
    Ok(DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]))
}

/// Looks up `ids` in a prediction map.
pub fn align(preds: &HashMap<String, f64>, ids: &[&str]) -> Result<Vec<f64>> {
    ids.iter()
        .map(|id| {
            preds
                .get(*id)
                .copied()
                .ok_or_else(|| Error::MissingId(id.to_string()).into())
        })
        .collect()
}

pub fn save(model: AnyModel, path: &Path) -> Result<()> {
    persist_model(&model, path).with_context(|| format!("writing {}", path.display()))
}

pub fn load(path: &Path, want: &str) -> Result<AnyModel> {
    let model = load_model(path)?;
    let kind = model.kind();
    let ok = match want {
        "kernel" => matches!(model, AnyModel::Kernel(_)),
        other => kind == other,
    };
    if !ok {
        return Err(Error::ModelVersion(format!("{}: expected a {want} model, found {kind}", path.display())).into());
    }
    Ok(model)
}
