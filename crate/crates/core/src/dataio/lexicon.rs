use std::collections::HashSet;
use std::io::BufRead;
use std::path::Path;

use indexmap::IndexMap;

use super::{check_cell, numbered_lines, open, source_name, write_file};
use crate::error::{Error, Result};

const DEFAULT_EMOJI: &str = include_str!("../../data/emoji_valence.tsv");
const DEFAULT_EMOTICONS: &str = include_str!("../../data/emoticons.tsv");

/// Unigram counts used to score word segmentations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WordFreq {
    counts: IndexMap<String, u64>,
    total: u64,
}

impl WordFreq {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `count` occurrences of `token`; zero counts are rejected.
    pub fn add(&mut self, token: impl Into<String>, count: u64) -> Result<()> {
        if count == 0 {
            return Err(Error::InvalidInput("word frequencies must be at least 1".into()));
        }
        *self.counts.entry(token.into()).or_insert(0) += count;
        self.total += count;
        Ok(())
    }

    /// Counts every token of every document.
    pub fn from_tokens<'a, I, D>(docs: I) -> Self
    where
        I: IntoIterator<Item = D>,
        D: IntoIterator<Item = &'a str>,
    {
        let mut wf = WordFreq::new();
        for doc in docs {
            for tok in doc {
                *wf.counts.entry(tok.to_string()).or_insert(0) += 1;
                wf.total += 1;
            }
        }
        wf
    }

    pub fn count(&self, token: &str) -> Option<u64> {
        self.counts.get(token).copied()
    }

    /// Corpus size N.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.counts.contains_key(token)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Resources for the tweet-specific counts and for segmentation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LexiconSet {
    pub emoji_valence: IndexMap<String, i64>,
    pub pos_emoticons: Vec<String>,
    pub neg_emoticons: Vec<String>,
    pub word_freq: WordFreq,
}

impl LexiconSet {
    /// Bundled emoji scores and emoticon lists with an empty frequency table.
    pub fn with_defaults() -> Self {
        let emoji_valence =
            parse_emoji_lexicon(DEFAULT_EMOJI.as_bytes(), "default emoji lexicon").expect("bundled emoji lexicon");
        let (pos_emoticons, neg_emoticons) =
            parse_emoticon_lexicon(DEFAULT_EMOTICONS.as_bytes(), "default emoticons").expect("bundled emoticons");
        LexiconSet {
            emoji_valence,
            pos_emoticons,
            neg_emoticons,
            word_freq: WordFreq::new(),
        }
    }
}

pub fn read_emoji_lexicon(path: &Path) -> Result<IndexMap<String, i64>> {
    parse_emoji_lexicon(open(path)?, &source_name(path))
}

pub fn parse_emoji_lexicon<R: BufRead>(reader: R, name: &str) -> Result<IndexMap<String, i64>> {
    let mut out = IndexMap::new();
    for item in numbered_lines(reader, name) {
        let (lineno, line) = item?;
        if line.is_empty() {
            continue;
        }
        let (emoji, score) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(name, lineno, "expected 'emoji<TAB>score'"))?;
        let score: i64 = score
            .trim()
            .parse()
            .map_err(|_| Error::parse(name, lineno, format!("'{score}' is not an integer")))?;
        if emoji.is_empty() {
            return Err(Error::parse(name, lineno, "empty emoji"));
        }
        if out.insert(emoji.to_string(), score).is_some() {
            return Err(Error::Duplicate(emoji.to_string()));
        }
    }
    Ok(out)
}

/// Returns (positive, negative) emoticon lists.
pub fn read_emoticon_lexicon(path: &Path) -> Result<(Vec<String>, Vec<String>)> {
    parse_emoticon_lexicon(open(path)?, &source_name(path))
}

pub fn parse_emoticon_lexicon<R: BufRead>(reader: R, name: &str) -> Result<(Vec<String>, Vec<String>)> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut seen = HashSet::new();
    for item in numbered_lines(reader, name) {
        let (lineno, line) = item?;
        if line.is_empty() {
            continue;
        }
        let (emo, polarity) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(name, lineno, "expected 'emoticon<TAB>pos|neg'"))?;
        if emo.is_empty() {
            return Err(Error::parse(name, lineno, "empty emoticon"));
        }
        if !seen.insert(emo.to_string()) {
            return Err(Error::Duplicate(emo.to_string()));
        }
        match polarity.trim() {
            "pos" => pos.push(emo.to_string()),
            "neg" => neg.push(emo.to_string()),
            other => return Err(Error::parse(name, lineno, format!("polarity '{other}' is not pos|neg"))),
        }
    }
    Ok((pos, neg))
}

pub fn read_word_freq(path: &Path) -> Result<WordFreq> {
    parse_word_freq(open(path)?, &source_name(path))
}

pub fn parse_word_freq<R: BufRead>(reader: R, name: &str) -> Result<WordFreq> {
    let mut wf = WordFreq::new();
    for item in numbered_lines(reader, name) {
        let (lineno, line) = item?;
        if line.is_empty() {
            continue;
        }
        let (tok, count) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(name, lineno, "expected 'token<TAB>count'"))?;
        let count: u64 = count
            .trim()
            .parse()
            .map_err(|_| Error::parse(name, lineno, format!("'{count}' is not a count")))?;
        if count == 0 {
            return Err(Error::parse(name, lineno, "count must be at least 1"));
        }
        if wf.contains(tok) {
            return Err(Error::Duplicate(tok.to_string()));
        }
        wf.add(tok, count)?;
    }
    Ok(wf)
}

pub fn write_word_freq(path: &Path, wf: &WordFreq) -> Result<()> {
    let mut s = String::new();
    for (tok, c) in wf.iter() {
        check_cell(tok)?;
        s.push_str(&format!("{tok}\t{c}\n"));
    }
    write_file(path, &s)
}
