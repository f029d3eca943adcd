//! Tweet normalization and hashtag segmentation.
//!
//! Text is lowercased, every non-alphanumeric codepoint becomes a space, and
//! tokens the vocabulary does not know are split by a unigram segmenter.

use std::collections::HashSet;

use crate::dataio::{LabeledInstance, WordFreq, WordVectorTable};

/// Longest segment the segmenter will consider, in characters.
pub const MAX_SEGMENT_LEN: usize = 24;

// log-space scores closer than this are treated as ties
const TIE_EPS: f64 = 1e-9;

/// Membership test for the vocabulary that decides which tokens get segmented.
pub trait Vocabulary {
    fn contains_token(&self, token: &str) -> bool;
}

impl Vocabulary for HashSet<String> {
    fn contains_token(&self, token: &str) -> bool {
        self.contains(token)
    }
}

impl Vocabulary for WordVectorTable {
    fn contains_token(&self, token: &str) -> bool {
        self.contains(token)
    }
}

impl Vocabulary for WordFreq {
    fn contains_token(&self, token: &str) -> bool {
        self.contains(token)
    }
}

/// Lowercase, strip non-alphanumerics, split on whitespace and segment
/// out-of-vocabulary tokens.
pub fn normalize_tokenize<V: Vocabulary + ?Sized>(raw_text: &str, vocab: &V, freq: &WordFreq) -> Vec<String> {
    let mut cleaned = String::with_capacity(raw_text.len());
    for c in raw_text.chars() {
        if c.is_alphanumeric() {
            // lowercasing may emit combining marks, which are dropped like any
            // other non-alphanumeric
            for lc in c.to_lowercase() {
                cleaned.push(if lc.is_alphanumeric() { lc } else { ' ' });
            }
        } else {
            cleaned.push(' ');
        }
    }
    let mut out = Vec::new();
    for tok in cleaned.split_whitespace() {
        if vocab.contains_token(tok) {
            out.push(tok.to_string());
        } else {
            out.extend(segment_word(tok, freq));
        }
    }
    out
}

/// Fills `tokens` on every instance.
pub fn tokenize_instances<V: Vocabulary + ?Sized>(data: &mut [LabeledInstance], vocab: &V, freq: &WordFreq) {
    for inst in data {
        inst.tokens = normalize_tokenize(&inst.raw_text, vocab, freq);
    }
}

/// Natural-log unigram probability of one segment.
///
/// Known words score `count / N`; unknown words `10 / (N * 1000^len)`, which
/// penalizes long unknown strings.
pub fn segment_log_prob(segment: &str, freq: &WordFreq) -> f64 {
    let n = freq.total() as f64;
    match freq.count(segment) {
        Some(c) => (c as f64).ln() - n.ln(),
        None => {
            let len = segment.chars().count() as f64;
            10f64.ln() - n.ln() - len * 1000f64.ln()
        }
    }
}

/// Most probable split of `word` under the unigram model.
///
/// Ties go to fewer segments, then to the lexicographically smallest
/// sequence of segments. With an empty frequency table every split is
/// equally uninformed and the word is returned whole.
pub fn segment_word(word: &str, freq: &WordFreq) -> Vec<String> {
    if word.is_empty() {
        return Vec::new();
    }
    if freq.total() == 0 {
        return vec![word.to_string()];
    }
    // byte offsets of char boundaries, including the end
    let bounds: Vec<usize> = word
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(word.len()))
        .collect();
    let n = bounds.len() - 1;

    struct Best {
        score: f64,
        segments: Vec<String>,
    }
    let mut best: Vec<Option<Best>> = Vec::with_capacity(n + 1);
    best.push(Some(Best {
        score: 0.0,
        segments: Vec::new(),
    }));
    for end in 1..=n {
        let mut slot: Option<Best> = None;
        for start in end.saturating_sub(MAX_SEGMENT_LEN)..end {
            let Some(prev) = best[start].as_ref() else { continue };
            let piece = &word[bounds[start]..bounds[end]];
            let score = prev.score + segment_log_prob(piece, freq);
            let better = match slot.as_ref() {
                None => true,
                Some(cur) => {
                    if score > cur.score + TIE_EPS {
                        true
                    } else if score < cur.score - TIE_EPS {
                        false
                    } else {
                        let len = prev.segments.len() + 1;
                        len < cur.segments.len()
                            || (len == cur.segments.len()
                                && prev
                                    .segments
                                    .iter()
                                    .map(String::as_str)
                                    .chain(std::iter::once(piece))
                                    .lt(cur.segments.iter().map(String::as_str)))
                    }
                }
            };
            if better {
                let mut segments = prev.segments.clone();
                segments.push(piece.to_string());
                slot = Some(Best { score, segments });
            }
        }
        best.push(slot);
    }
    best.pop()
        .flatten()
        .map(|b| b.segments)
        .unwrap_or_else(|| vec![word.to_string()])
}
