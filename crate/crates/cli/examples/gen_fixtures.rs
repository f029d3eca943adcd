//! Regenerates the synthetic fixtures under `fixtures/`.
//!
//! ```text
//! cargo run -p affect-cli --example gen_fixtures [-- <out-dir>]
//! ```
//!
//! Every sample carries an 8-dimensional latent vector that is also its row
//! in `sentence_features.tsv`. Regression intensity is a smooth function of
//! that vector, ordinal classes cut the intensity at skewed boundaries, and
//! multi-label sets are half-spaces with a margin. Tweet texts repeat the
//! signal through cue words so the word-vector and tweet blocks agree with it.

use std::path::PathBuf;

use affect_core::dataio::{self, DatasetKind, Emotion, HashtagDoc, LabeledInstance, SentenceFeatureMatrix, WordFreq};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const DIM: usize = 8;
const SEED: u64 = 20180601;

const FILLER: &[&str] = &[
    "today", "the", "a", "just", "really", "people", "work", "home", "time", "morning", "night", "week", "this",
    "that", "my", "our", "with", "about", "again", "still", "going", "back", "after", "before", "city", "train",
    "phone", "coffee", "friends", "family", "weekend", "news", "game", "music", "movie", "school", "office", "street",
    "weather", "dinner",
];

const CUES: &[(&str, &[&str])] = &[
    (
        "joy",
        &["happy", "delighted", "smiling", "cheerful", "wonderful", "celebrate"],
    ),
    ("sadness", &["sad", "lonely", "crying", "heartbroken", "gloomy", "miss"]),
    ("anger", &["angry", "furious", "outraged", "rage", "annoyed", "livid"]),
    ("fear", &["scared", "terrified", "afraid", "panic", "nervous", "dread"]),
    (
        "surprise",
        &["shocked", "amazed", "unexpected", "astonished", "stunned", "wow"],
    ),
];

fn cues(class: &str) -> &'static [&'static str] {
    CUES.iter()
        .find(|(c, _)| *c == class)
        .map(|(_, w)| *w)
        .expect("known class")
}

fn latent(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..DIM).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn intensity(u: &[f64]) -> f64 {
    let t = 0.5 + 0.4 * (0.7 * u[0] + 0.4 * u[1].sin() + 0.3 * u[2]).tanh();
    (t * 1000.0).round() / 1000.0
}

// class 0 covers [0, 0.6), much wider than an equal-width split
fn ordinal(t: f64) -> i32 {
    match t {
        t if t < 0.6 => 0,
        t if t < 0.72 => 1,
        t if t < 0.84 => 2,
        _ => 3,
    }
}

/// Filler text of `len` words with `cue_words` spliced in at random spots.
fn sentence(rng: &mut ChaCha8Rng, len: usize, cue_words: &[&str]) -> Vec<String> {
    let mut words: Vec<String> = (0..len).map(|_| FILLER.choose(rng).unwrap().to_string()).collect();
    for cue in cue_words {
        let at = rng.random_range(0..=words.len());
        words.insert(at, cue.to_string());
    }
    words
}

fn hashtag_corpus(rng: &mut ChaCha8Rng, n: usize, freq: &mut Vec<String>) -> Vec<HashtagDoc> {
    let classes = ["joy", "sadness", "anger", "fear"];
    (0..n)
        .map(|i| {
            let label = classes[i % classes.len()];
            let picked: Vec<&str> = cues(label).choose_multiple(rng, 2).copied().collect();
            let len = rng.random_range(6..=10);
            let mut words = sentence(rng, len, &picked);
            freq.extend(words.iter().cloned());
            if rng.random_bool(0.2) {
                // concatenated hashtag for the segmenter
                let tag = format!("#{}{}", cues(label).choose(rng).unwrap(), FILLER.choose(rng).unwrap());
                words.push(tag);
            }
            HashtagDoc {
                label: label.to_string(),
                text: words.join(" "),
            }
        })
        .collect()
}

struct Sample {
    inst: LabeledInstance,
    u: Vec<f64>,
}

fn regression_samples(rng: &mut ChaCha8Rng, n: usize, prefix: &str, freq: &mut Vec<String>) -> Vec<Sample> {
    (0..n)
        .map(|i| {
            let u = latent(rng);
            let t = intensity(&u);
            let k = (4.0 * t).round() as usize;
            let picked: Vec<&str> = (0..k).map(|_| *cues("anger").choose(rng).unwrap()).collect();
            let len = rng.random_range(6..=10);
            let words = sentence(rng, len, &picked);
            freq.extend(words.iter().cloned());
            let bangs = "!".repeat((3.0 * t).round() as usize);
            let mut inst = LabeledInstance::new(format!("{prefix}-{i:04}"), format!("{}{bangs}", words.join(" ")));
            inst.emotion = Some(Emotion::Anger);
            inst.reg_label = Some(t);
            inst.ord_label = Some(ordinal(t));
            Sample { inst, u }
        })
        .collect()
}

const ML_LABELS: [&str; 5] = ["anger", "fear", "joy", "sadness", "surprise"];
const MARGIN: f64 = 0.5;

fn multilabel_samples(
    rng: &mut ChaCha8Rng,
    n: usize,
    planes: &[(Vec<f64>, f64)],
    freq: &mut Vec<String>,
) -> Vec<Sample> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u = latent(rng);
        let margins: Vec<f64> = planes
            .iter()
            .map(|(w, b)| w.iter().zip(&u).map(|(a, x)| a * x).sum::<f64>() + b)
            .collect();
        if margins.iter().any(|m| m.abs() < MARGIN) {
            continue;
        }
        let bits: Vec<bool> = margins.iter().map(|m| *m > 0.0).collect();
        let picked: Vec<&str> = ML_LABELS
            .iter()
            .zip(&bits)
            .filter(|(_, on)| **on)
            .map(|(l, _)| *cues(l).choose(rng).unwrap())
            .collect();
        let len = rng.random_range(6..=10);
        let words = sentence(rng, len, &picked);
        freq.extend(words.iter().cloned());
        let mut inst = LabeledInstance::new(format!("ml-{:04}", out.len()), words.join(" "));
        inst.multilabels = Some(bits);
        out.push(Sample { inst, u });
    }
    out
}

fn main() -> anyhow::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut words = Vec::new();

    let corpus = hashtag_corpus(&mut rng, 500, &mut words);
    let corpus_dev = hashtag_corpus(&mut rng, 100, &mut words);
    dataio::write_hashtag_corpus(&dir.join("hashtag_train.tsv"), &corpus)?;
    dataio::write_hashtag_corpus(&dir.join("hashtag_dev.tsv"), &corpus_dev)?;

    let reg = regression_samples(&mut rng, 300, "reg", &mut words);
    let (reg_train, reg_dev) = reg.split_at(200);

    let planes: Vec<(Vec<f64>, f64)> = (0..ML_LABELS.len())
        .map(|_| (latent(&mut rng), rng.random_range(-0.5..0.5)))
        .collect();
    let ml = multilabel_samples(&mut rng, 300, &planes, &mut words);
    let (ml_train, ml_dev) = ml.split_at(200);

    // paired sentences that differ only in the gendered word
    let mut bias = Vec::new();
    let mut pairs = String::new();
    for i in 0..10 {
        let u = latent(&mut rng);
        let t = intensity(&u);
        let cue = *cues("anger").choose(&mut rng).unwrap();
        for (tag, who) in [("f", "sister"), ("m", "brother")] {
            let mut inst = LabeledInstance::new(format!("bias-{i:02}{tag}"), format!("my {who} is {cue} today"));
            inst.emotion = Some(Emotion::Anger);
            inst.reg_label = Some(t);
            bias.push(Sample { inst, u: u.clone() });
        }
        pairs.push_str(&format!("bias-{i:02}f\tbias-{i:02}m\tgender\tanger\n"));
    }
    words.extend(["my", "sister", "brother", "is"].map(String::from));

    let insts = |s: &[Sample]| s.iter().map(|x| x.inst.clone()).collect::<Vec<_>>();
    dataio::write_intensity_dataset(&dir.join("reg_train.tsv"), DatasetKind::Reg, &insts(reg_train))?;
    dataio::write_intensity_dataset(&dir.join("reg_dev.tsv"), DatasetKind::Reg, &insts(reg_dev))?;
    dataio::write_intensity_dataset(&dir.join("oc_train.tsv"), DatasetKind::Oc, &insts(reg_train))?;
    dataio::write_intensity_dataset(&dir.join("oc_dev.tsv"), DatasetKind::Oc, &insts(reg_dev))?;
    dataio::write_intensity_dataset(&dir.join("bias.tsv"), DatasetKind::Reg, &insts(&bias))?;
    std::fs::write(dir.join("bias_pairs.tsv"), pairs)?;
    let labels: Vec<String> = ML_LABELS.map(String::from).to_vec();
    dataio::write_multilabel_dataset(&dir.join("ml_train.tsv"), &labels, &insts(ml_train))?;
    dataio::write_multilabel_dataset(&dir.join("ml_dev.tsv"), &labels, &insts(ml_dev))?;

    let mut features = SentenceFeatureMatrix::new(DIM)?;
    for s in reg.iter().chain(&ml).chain(&bias) {
        let row = s.u.iter().map(|v| (v * 1e6).round() / 1e6).collect();
        features.insert(s.inst.id.clone(), row)?;
    }
    dataio::write_sentence_features(&dir.join("sentence_features.tsv"), &features)?;

    let mut counts = std::collections::BTreeMap::<String, u64>::new();
    for w in words {
        *counts.entry(w).or_default() += 1;
    }
    let mut freq = WordFreq::new();
    for (w, c) in counts {
        freq.add(w, c)?;
    }
    dataio::write_word_freq(&dir.join("word_freq.tsv"), &freq)?;
    println!("fixtures written to {}", dir.display());
    Ok(())
}
