//! File formats and model persistence.
//!
//! All text formats are UTF-8. Tabular files use a single tab as separator
//! and never quote cells, so writers refuse cells that contain tabs or line
//! breaks instead of producing files the readers would misparse.

mod dataset;
mod lexicon;
mod persist;
mod tables;

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dataset::{
    parse_bias_pairs, parse_hashtag_corpus, parse_intensity_dataset, parse_multilabel_dataset, parse_predictions,
    read_bias_pairs, read_hashtag_corpus, read_intensity_dataset, read_multilabel_dataset, read_predictions,
    write_hashtag_corpus, write_intensity_dataset, write_multilabel_dataset, write_predictions, DatasetKind,
    HashtagDoc,
};
pub use lexicon::{
    parse_emoji_lexicon, parse_emoticon_lexicon, parse_word_freq, read_emoji_lexicon, read_emoticon_lexicon,
    read_word_freq, write_word_freq, LexiconSet, WordFreq,
};
pub use persist::{load_model, persist_model, AnyModel, MODEL_FORMAT_VERSION};
pub use tables::{
    parse_sentence_features, parse_word_vectors, read_sentence_features, read_word_vectors, write_sentence_features,
    write_word_vectors, SentenceFeatureMatrix, WordVectorTable,
};

/// Affect dimension of an intensity sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger,
    Fear,
    Joy,
    Sadness,
    Valence,
}

impl Emotion {
    pub const ALL: [Emotion; 5] = [
        Emotion::Anger,
        Emotion::Fear,
        Emotion::Joy,
        Emotion::Sadness,
        Emotion::Valence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Fear => "fear",
            Emotion::Joy => "joy",
            Emotion::Sadness => "sadness",
            Emotion::Valence => "valence",
        }
    }

    /// Legal ordinal classes: 0..=3 for emotions, -3..=3 for valence.
    pub fn ordinal_range(self) -> (i32, i32) {
        match self {
            Emotion::Valence => (-3, 3),
            _ => (0, 3),
        }
    }

    pub fn ordinals(self) -> Vec<i32> {
        let (lo, hi) = self.ordinal_range();
        (lo..=hi).collect()
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Emotion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "anger" => Ok(Emotion::Anger),
            "fear" => Ok(Emotion::Fear),
            "joy" => Ok(Emotion::Joy),
            "sadness" => Ok(Emotion::Sadness),
            "valence" => Ok(Emotion::Valence),
            other => Err(format!("unknown affect dimension '{other}'")),
        }
    }
}

/// One text sample with whichever labels its source file carries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledInstance {
    pub id: String,
    pub raw_text: String,
    /// Filled by [`crate::textprep`]; empty straight out of a reader.
    pub tokens: Vec<String>,
    pub emotion: Option<Emotion>,
    pub reg_label: Option<f64>,
    pub ord_label: Option<i32>,
    pub multilabels: Option<Vec<bool>>,
}

impl LabeledInstance {
    pub fn new(id: impl Into<String>, raw_text: impl Into<String>) -> Self {
        LabeledInstance {
            id: id.into(),
            raw_text: raw_text.into(),
            ..Default::default()
        }
    }
}

pub(crate) fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub(crate) fn source_name(path: &Path) -> String {
    path.display().to_string()
}

/// Lines with their 1-based numbers; a trailing `\r` is dropped.
pub(crate) fn numbered_lines<'a, R: BufRead + 'a>(
    reader: R,
    name: &'a str,
) -> impl Iterator<Item = Result<(usize, String)>> + 'a {
    reader.lines().enumerate().map(move |(i, line)| {
        let mut line = line.map_err(|e| Error::io(name, e))?;
        if line.ends_with('\r') {
            line.pop();
        }
        Ok((i + 1, line))
    })
}

pub(crate) fn check_cell(cell: &str) -> Result<()> {
    if cell.contains(['\t', '\n', '\r']) {
        return Err(Error::InvalidInput(format!(
            "cell {cell:?} contains a tab or line break"
        )));
    }
    Ok(())
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub(crate) fn parse_f64(cell: &str, name: &str, line: usize) -> Result<f64> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| Error::parse(name, line, format!("'{cell}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(name, line, format!("'{cell}' is not finite")));
    }
    Ok(v)
}
