//! Per-sample feature construction.
//!
//! A sample's row is the concatenation, in this order, of an ingested
//! sentence representation, the averaged emotional word vector of its tokens
//! and six tweet-specific counts taken from the raw text.

use std::ops::Range;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::{LabeledInstance, LexiconSet, SentenceFeatureMatrix, WordVectorTable};
use crate::error::{Error, Result};

pub const STD_FLOOR: f64 = 1e-12;

/// Counts read off the raw, unnormalized tweet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TweetFeatures {
    pub n_uppercase: u32,
    pub n_pos_emoticons: u32,
    pub n_neg_emoticons: u32,
    pub emoji_valence_sum: i64,
    pub n_elongated: u32,
    pub n_excl_quest: u32,
}

impl TweetFeatures {
    pub const WIDTH: usize = 6;
    pub const NAMES: [&'static str; 6] = [
        "n_uppercase",
        "n_pos_emoticons",
        "n_neg_emoticons",
        "emoji_valence_sum",
        "n_elongated",
        "n_excl_quest",
    ];

    pub fn to_vec(self) -> [f64; 6] {
        [
            self.n_uppercase as f64,
            self.n_pos_emoticons as f64,
            self.n_neg_emoticons as f64,
            self.emoji_valence_sum as f64,
            self.n_elongated as f64,
            self.n_excl_quest as f64,
        ]
    }
}

pub fn tweet_specific_features(raw_text: &str, lex: &LexiconSet) -> TweetFeatures {
    let mut f = TweetFeatures::default();
    for tok in raw_text.split_whitespace() {
        if tok.chars().count() >= 2 && tok.chars().all(|c| c.is_alphabetic() && c.is_uppercase()) {
            f.n_uppercase += 1;
        }
        if is_elongated(tok) {
            f.n_elongated += 1;
        }
    }

    let emoticons: Vec<(&str, bool)> = lex
        .pos_emoticons
        .iter()
        .map(|e| (e.as_str(), true))
        .chain(lex.neg_emoticons.iter().map(|e| (e.as_str(), false)))
        .collect();
    for positive in scan_longest(raw_text, &emoticons) {
        if positive {
            f.n_pos_emoticons += 1;
        } else {
            f.n_neg_emoticons += 1;
        }
    }

    let emoji: Vec<(&str, i64)> = lex.emoji_valence.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    f.emoji_valence_sum = scan_longest(raw_text, &emoji).sum();

    f.n_excl_quest = raw_text.chars().filter(|&c| c == '!' || c == '?').count() as u32;
    f
}

/// A letter repeated three or more times in a row ("soooo").
fn is_elongated(token: &str) -> bool {
    let mut prev = None;
    let mut run = 0;
    for c in token.chars() {
        if Some(c) == prev {
            run += 1;
        } else {
            prev = Some(c);
            run = 1;
        }
        if run >= 3 && c.is_alphabetic() {
            return true;
        }
    }
    false
}

/// Left-to-right, non-overlapping, longest-match scan; yields the payload of
/// every match.
fn scan_longest<'a, T: Copy>(text: &'a str, patterns: &'a [(&'a str, T)]) -> impl Iterator<Item = T> + 'a {
    let mut pos = 0;
    std::iter::from_fn(move || {
        while pos < text.len() {
            let rest = &text[pos..];
            let hit = patterns
                .iter()
                .filter(|(p, _)| !p.is_empty() && rest.starts_with(p))
                .max_by_key(|(p, _)| p.len());
            match hit {
                Some((p, payload)) => {
                    pos += p.len();
                    return Some(*payload);
                }
                None => {
                    pos += rest.chars().next().map_or(1, char::len_utf8);
                }
            }
        }
        None
    })
}

/// Mean of the tokens' vectors; unknown tokens count as zero vectors.
pub fn evec_sentence_vector(tokens: &[String], table: &WordVectorTable) -> Vec<f64> {
    let mut acc = vec![0.0; table.dim()];
    if tokens.is_empty() {
        return acc;
    }
    for tok in tokens {
        if let Some(v) = table.get(tok) {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x;
            }
        }
    }
    let n = tokens.len() as f64;
    for a in &mut acc {
        *a /= n;
    }
    acc
}

/// Which feature groups to concatenate.
#[derive(Debug, Clone, Copy, Default)]
pub struct FeatureBlocks<'a> {
    pub sentence: Option<&'a SentenceFeatureMatrix>,
    pub evec: Option<&'a WordVectorTable>,
    pub tweet: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRange {
    pub name: String,
    pub start: usize,
    pub end: usize,
}

impl BlockRange {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn width(&self) -> usize {
        self.end - self.start
    }
}

/// Feature matrix with one row per sample, in dataset order.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledFeatures {
    pub ids: Vec<String>,
    pub matrix: DMatrix<f64>,
    pub layout: Vec<BlockRange>,
}

impl AssembledFeatures {
    pub fn width(&self) -> usize {
        self.matrix.ncols()
    }

    /// Keeps only the named blocks, in their original order.
    pub fn select(&self, names: &[&str]) -> Result<AssembledFeatures> {
        for n in names {
            if !self.layout.iter().any(|b| b.name == *n) {
                return Err(Error::InvalidInput(format!("no feature block named '{n}'")));
            }
        }
        let kept: Vec<&BlockRange> = self
            .layout
            .iter()
            .filter(|b| names.contains(&b.name.as_str()))
            .collect();
        let cols: Vec<usize> = kept.iter().flat_map(|b| b.range()).collect();
        let matrix = self.matrix.select_columns(&cols);
        let mut layout = Vec::with_capacity(kept.len());
        let mut start = 0;
        for b in kept {
            layout.push(BlockRange {
                name: b.name.clone(),
                start,
                end: start + b.width(),
            });
            start += b.width();
        }
        Ok(AssembledFeatures {
            ids: self.ids.clone(),
            matrix,
            layout,
        })
    }
}

pub fn assemble(data: &[LabeledInstance], blocks: &FeatureBlocks<'_>, lex: &LexiconSet) -> Result<AssembledFeatures> {
    let mut layout = Vec::new();
    let mut width = 0;
    let mut push = |name: &str, w: usize| {
        layout.push(BlockRange {
            name: name.to_string(),
            start: width,
            end: width + w,
        });
        width += w;
    };
    if let Some(m) = blocks.sentence {
        push("sentence", m.dim());
    }
    if let Some(t) = blocks.evec {
        push("evec", t.dim());
    }
    if blocks.tweet {
        push("tweet", TweetFeatures::WIDTH);
    }
    if width == 0 {
        return Err(Error::InvalidInput("no feature blocks selected".into()));
    }

    let rows: Vec<Vec<f64>> = data
        .par_iter()
        .map(|inst| {
            let mut row = Vec::with_capacity(width);
            if let Some(m) = blocks.sentence {
                let r = m.get(&inst.id).ok_or_else(|| Error::MissingId(inst.id.clone()))?;
                row.extend_from_slice(r);
            }
            if let Some(t) = blocks.evec {
                row.extend(evec_sentence_vector(&inst.tokens, t));
            }
            if blocks.tweet {
                row.extend(tweet_specific_features(&inst.raw_text, lex).to_vec());
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let matrix = DMatrix::from_fn(rows.len(), width, |i, j| rows[i][j]);
    Ok(AssembledFeatures {
        ids: data.iter().map(|d| d.id.clone()).collect(),
        matrix,
        layout,
    })
}

/// Column-wise z-scoring fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub means: Vec<f64>,
    pub stddevs: Vec<f64>,
}

impl FeatureScaler {
    /// Population mean and standard deviation per column, the latter
    /// floored at [`STD_FLOOR`].
    pub fn fit(x: &DMatrix<f64>) -> Result<Self> {
        if x.nrows() < 2 {
            return Err(Error::InvalidInput(format!(
                "scaler needs at least 2 rows, got {}",
                x.nrows()
            )));
        }
        let m = x.nrows() as f64;
        let mut means = Vec::with_capacity(x.ncols());
        let mut stddevs = Vec::with_capacity(x.ncols());
        for col in x.column_iter() {
            let mean = col.iter().sum::<f64>() / m;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
            means.push(mean);
            stddevs.push(var.sqrt().max(STD_FLOOR));
        }
        Ok(FeatureScaler { means, stddevs })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check(x)?;
        Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            (x[(i, j)] - self.means[j]) / self.stddevs[j]
        }))
    }

    pub fn inverse_transform(&self, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check(z)?;
        Ok(DMatrix::from_fn(z.nrows(), z.ncols(), |i, j| {
            z[(i, j)] * self.stddevs[j] + self.means[j]
        }))
    }

    fn check(&self, x: &DMatrix<f64>) -> Result<()> {
        if x.ncols() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.ncols(),
            });
        }
        Ok(())
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.means.len() != self.stddevs.len() {
            return Err(Error::ModelVersion("scaler means/stddevs length mismatch".into()));
        }
        if self.stddevs.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::ModelVersion("scaler stddevs must be positive".into()));
        }
        Ok(())
    }
}

pub fn fit_scaler(train: &AssembledFeatures) -> Result<FeatureScaler> {
    FeatureScaler::fit(&train.matrix)
}

pub fn apply_scaler(scaler: &FeatureScaler, features: &AssembledFeatures) -> Result<AssembledFeatures> {
    Ok(AssembledFeatures {
        ids: features.ids.clone(),
        matrix: scaler.transform(&features.matrix)?,
        layout: features.layout.clone(),
    })
}
