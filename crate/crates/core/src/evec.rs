//! Emotional word vectors.
//!
//! A small convolutional text classifier is trained to predict the emotion
//! label of hashtag-labeled documents; its embedding layer, shaped by that
//! objective, is exported as a word-vector table.
//!
//! Architecture: embedding lookup, 1-d valid convolutions of several widths,
//! tanh, max-over-time pooling, one affine layer and softmax. Row 0 of the
//! embedding matrix is the padding vector and is never updated.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataio::WordVectorTable;
use crate::error::{Error, Result};

pub const PAD: usize = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvecConfig {
    pub emb_dim: usize,
    pub filter_widths: Vec<usize>,
    pub filters_per_width: usize,
    pub classes: Vec<String>,
    pub lr: f64,
    pub l2: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    pub patience: usize,
    /// Half-width of the uniform embedding initialization.
    pub emb_init: f64,
}

impl Default for EvecConfig {
    fn default() -> Self {
        EvecConfig {
            emb_dim: 300,
            filter_widths: vec![3, 4, 5],
            filters_per_width: 64,
            classes: ["joy", "sadness", "anger", "fear"].map(String::from).to_vec(),
            lr: 0.5,
            l2: 1e-4,
            epochs: 20,
            batch: 16,
            seed: 0,
            patience: 3,
            emb_init: 0.1,
        }
    }
}

impl EvecConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(format!("evec config: {m}")));
        if self.emb_dim == 0 {
            return bad("emb_dim must be at least 1");
        }
        if self.filter_widths.is_empty() || self.filter_widths.contains(&0) || self.filters_per_width == 0 {
            return bad("filter widths and counts must be at least 1");
        }
        if self.classes.len() < 2 {
            return bad("need at least 2 classes");
        }
        if !(self.lr > 0.0 && self.l2 >= 0.0 && self.emb_init >= 0.0) || self.batch == 0 {
            return bad("lr and batch must be positive, l2 and emb_init non-negative");
        }
        Ok(())
    }
}

/// Filters of one width, each row of length `width · emb_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvBank {
    pub width: usize,
    /// Row-major, one row per filter.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ConvBank {
    pub fn n_filters(&self) -> usize {
        self.bias.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvecModel {
    pub classes: Vec<String>,
    pub emb_dim: usize,
    /// Token of embedding row `i + 1`.
    pub vocab: Vec<String>,
    /// Row-major `(vocab.len() + 1) × emb_dim`; row 0 is padding.
    pub embeddings: Vec<f64>,
    pub convs: Vec<ConvBank>,
    /// Row-major `total_filters × classes`.
    pub out_weights: Vec<f64>,
    pub out_bias: Vec<f64>,
}

/// Gradients matching the layout of [`EvecModel`]. Embedding gradients are
/// sparse and keyed by row; the padding row never appears.
#[derive(Debug, Clone, PartialEq)]
pub struct EvecGradients {
    pub embeddings: BTreeMap<usize, Vec<f64>>,
    pub conv_weights: Vec<Vec<f64>>,
    pub conv_bias: Vec<Vec<f64>>,
    pub out_weights: Vec<f64>,
    pub out_bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub probs: Vec<f64>,
    pub pooled: Vec<f64>,
    /// Window start of each pooled maximum.
    pub argmax: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_loss: f64,
    pub dev_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct EvecTraining {
    pub model: EvecModel,
    pub history: Vec<EpochStats>,
    /// Epoch (1-based) of the returned snapshot; 0 means the initial model.
    pub best_epoch: usize,
}

impl EvecModel {
    /// Fresh model over `vocab` with weights drawn from `rng`.
    pub fn init(vocab: Vec<String>, cfg: &EvecConfig, rng: &mut impl Rng) -> Result<Self> {
        cfg.validate()?;
        let d = cfg.emb_dim;
        let mut uniform = |n: usize, a: f64| -> Vec<f64> {
            (0..n)
                .map(|_| if a > 0.0 { rng.random_range(-a..a) } else { 0.0 })
                .collect()
        };
        let mut embeddings = vec![0.0; d];
        embeddings.extend(uniform(vocab.len() * d, cfg.emb_init));
        let convs: Vec<ConvBank> = cfg
            .filter_widths
            .iter()
            .map(|&w| {
                let fan_in = w * d;
                let a = 1.0 / (fan_in as f64).sqrt();
                ConvBank {
                    width: w,
                    weights: uniform(cfg.filters_per_width * fan_in, a),
                    bias: uniform(cfg.filters_per_width, a),
                }
            })
            .collect();
        let total: usize = convs.iter().map(ConvBank::n_filters).sum();
        let k = cfg.classes.len();
        let a = 1.0 / (total as f64).sqrt();
        Ok(EvecModel {
            classes: cfg.classes.clone(),
            emb_dim: d,
            vocab,
            embeddings,
            convs,
            out_weights: uniform(total * k, a),
            out_bias: uniform(k, a),
        })
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn n_rows(&self) -> usize {
        self.vocab.len() + 1
    }

    pub fn total_filters(&self) -> usize {
        self.convs.iter().map(ConvBank::n_filters).sum()
    }

    pub fn max_width(&self) -> usize {
        self.convs.iter().map(|c| c.width).max().unwrap_or(1)
    }

    pub fn embedding(&self, row: usize) -> &[f64] {
        &self.embeddings[row * self.emb_dim..(row + 1) * self.emb_dim]
    }

    pub fn vocab_index(&self) -> HashMap<&str, usize> {
        self.vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i + 1))
            .collect()
    }

    /// Token indices with out-of-vocabulary tokens dropped, padded up to the
    /// widest filter.
    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        encode_with(&self.vocab_index(), tokens, self.max_width())
    }

    pub fn forward(&self, seq: &[usize]) -> Result<Forward> {
        forward(self, seq)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ModelVersion(format!("evec model: {m}")));
        let d = self.emb_dim;
        let k = self.n_classes();
        if d == 0 || k < 2 || self.convs.is_empty() {
            return bad("empty dimensions".into());
        }
        if self.embeddings.len() != self.n_rows() * d {
            return bad(format!(
                "{} embedding values for {} rows",
                self.embeddings.len(),
                self.n_rows()
            ));
        }
        if self.embeddings[..d].iter().any(|&v| v != 0.0) {
            return bad("padding row is not zero".into());
        }
        for c in &self.convs {
            if c.width == 0 || c.bias.is_empty() || c.weights.len() != c.bias.len() * c.width * d {
                return bad(format!("malformed width-{} filter bank", c.width));
            }
        }
        if self.out_weights.len() != self.total_filters() * k || self.out_bias.len() != k {
            return bad("output layer shape".into());
        }
        let all = self
            .embeddings
            .iter()
            .chain(self.convs.iter().flat_map(|c| c.weights.iter().chain(&c.bias)))
            .chain(&self.out_weights)
            .chain(&self.out_bias);
        if all.into_iter().any(|v| !v.is_finite()) {
            return bad("non-finite parameter".into());
        }
        Ok(())
    }
}

fn encode_with(index: &HashMap<&str, usize>, tokens: &[String], min_len: usize) -> Vec<usize> {
    let mut seq: Vec<usize> = tokens.iter().filter_map(|t| index.get(t.as_str()).copied()).collect();
    if seq.len() < min_len {
        seq.resize(min_len, PAD);
    }
    seq
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn forward(model: &EvecModel, seq: &[usize]) -> Result<Forward> {
    let d = model.emb_dim;
    let n_rows = model.n_rows();
    if let Some(&bad) = seq.iter().find(|&&i| i >= n_rows) {
        return Err(Error::InvalidInput(format!(
            "token index {bad} out of range (vocabulary rows {n_rows})"
        )));
    }
    if seq.len() < model.max_width() {
        return Err(Error::InvalidInput(format!(
            "sequence of length {} is shorter than the widest filter ({})",
            seq.len(),
            model.max_width()
        )));
    }
    let mut pooled = Vec::with_capacity(model.total_filters());
    let mut argmax = Vec::with_capacity(model.total_filters());
    let mut window = Vec::new();
    for bank in &model.convs {
        let w = bank.width;
        let span = w * d;
        let positions = seq.len() - w + 1;
        let mut best = vec![(f64::NEG_INFINITY, 0usize); bank.n_filters()];
        for t in 0..positions {
            window.clear();
            for &row in &seq[t..t + w] {
                window.extend_from_slice(model.embedding(row));
            }
            for (f, slot) in best.iter_mut().enumerate() {
                let z = bank.bias[f] + dot(&bank.weights[f * span..(f + 1) * span], &window);
                let h = z.tanh();
                if h > slot.0 {
                    *slot = (h, t);
                }
            }
        }
        for (h, t) in best {
            pooled.push(h);
            argmax.push(t);
        }
    }
    let k = model.n_classes();
    let mut logits = model.out_bias.clone();
    for (i, &p) in pooled.iter().enumerate() {
        for (c, l) in logits.iter_mut().enumerate() {
            *l += p * model.out_weights[i * k + c];
        }
    }
    Ok(Forward {
        probs: softmax(&logits),
        pooled,
        argmax,
    })
}

fn l2_penalty(model: &EvecModel, l2: f64) -> f64 {
    if l2 == 0.0 {
        return 0.0;
    }
    let sq: f64 = model
        .convs
        .iter()
        .flat_map(|c| c.weights.iter())
        .chain(&model.out_weights)
        .map(|w| w * w)
        .sum();
    0.5 * l2 * sq
}

/// Mean cross-entropy over the batch plus `½·l2·‖W‖²` over convolution and
/// output weights, with gradients for every parameter group.
pub fn loss_and_gradients(model: &EvecModel, batch: &[(Vec<usize>, usize)], l2: f64) -> Result<(f64, EvecGradients)> {
    if batch.is_empty() {
        return Err(Error::InvalidInput("empty batch".into()));
    }
    let d = model.emb_dim;
    let k = model.n_classes();
    let scale = 1.0 / batch.len() as f64;
    let mut g = EvecGradients {
        embeddings: BTreeMap::new(),
        conv_weights: model.convs.iter().map(|c| vec![0.0; c.weights.len()]).collect(),
        conv_bias: model.convs.iter().map(|c| vec![0.0; c.bias.len()]).collect(),
        out_weights: vec![0.0; model.out_weights.len()],
        out_bias: vec![0.0; k],
    };
    let mut ce = 0.0;
    for (seq, class) in batch {
        if *class >= k {
            return Err(Error::InvalidInput(format!("class index {class} out of range")));
        }
        let fw = forward(model, seq)?;
        ce -= fw.probs[*class].max(f64::MIN_POSITIVE).ln();
        let mut dlogits = fw.probs.clone();
        dlogits[*class] -= 1.0;
        dlogits.iter_mut().for_each(|v| *v *= scale);
        for (c, v) in dlogits.iter().enumerate() {
            g.out_bias[c] += v;
        }
        let mut fi = 0;
        for (b, bank) in model.convs.iter().enumerate() {
            let span = bank.width * d;
            for f in 0..bank.n_filters() {
                let h = fw.pooled[fi];
                let mut dh = 0.0;
                for c in 0..k {
                    g.out_weights[fi * k + c] += h * dlogits[c];
                    dh += model.out_weights[fi * k + c] * dlogits[c];
                }
                let dz = dh * (1.0 - h * h);
                g.conv_bias[b][f] += dz;
                let t = fw.argmax[fi];
                let wrow = &bank.weights[f * span..(f + 1) * span];
                let grow = &mut g.conv_weights[b][f * span..(f + 1) * span];
                for (j, &row) in seq[t..t + bank.width].iter().enumerate() {
                    let emb = model.embedding(row);
                    for e in 0..d {
                        grow[j * d + e] += dz * emb[e];
                    }
                    if row != PAD {
                        let ge = g.embeddings.entry(row).or_insert_with(|| vec![0.0; d]);
                        for e in 0..d {
                            ge[e] += dz * wrow[j * d + e];
                        }
                    }
                }
                fi += 1;
            }
        }
    }
    if l2 > 0.0 {
        for (gb, bank) in g.conv_weights.iter_mut().zip(&model.convs) {
            for (gw, w) in gb.iter_mut().zip(&bank.weights) {
                *gw += l2 * w;
            }
        }
        for (gw, w) in g.out_weights.iter_mut().zip(&model.out_weights) {
            *gw += l2 * w;
        }
    }
    Ok((ce * scale + l2_penalty(model, l2), g))
}

fn apply_step(model: &mut EvecModel, g: &EvecGradients, lr: f64) {
    let d = model.emb_dim;
    for (&row, ge) in &g.embeddings {
        for (v, gv) in model.embeddings[row * d..(row + 1) * d].iter_mut().zip(ge) {
            *v -= lr * gv;
        }
    }
    for (b, bank) in model.convs.iter_mut().enumerate() {
        for (v, gv) in bank.weights.iter_mut().zip(&g.conv_weights[b]) {
            *v -= lr * gv;
        }
        for (v, gv) in bank.bias.iter_mut().zip(&g.conv_bias[b]) {
            *v -= lr * gv;
        }
    }
    for (v, gv) in model.out_weights.iter_mut().zip(&g.out_weights) {
        *v -= lr * gv;
    }
    for (v, gv) in model.out_bias.iter_mut().zip(&g.out_bias) {
        *v -= lr * gv;
    }
}

/// Mean cross-entropy and accuracy over encoded examples.
pub fn evaluate(model: &EvecModel, data: &[(Vec<usize>, usize)]) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Ok((f64::NAN, f64::NAN));
    }
    let mut ce = 0.0;
    let mut hits = 0usize;
    for (seq, class) in data {
        let fw = forward(model, seq)?;
        ce -= fw.probs[*class].max(f64::MIN_POSITIVE).ln();
        let pred = (0..fw.probs.len())
            .max_by(|&a, &b| fw.probs[a].total_cmp(&fw.probs[b]).then(b.cmp(&a)))
            .expect("at least two classes");
        hits += usize::from(pred == *class);
    }
    let n = data.len() as f64;
    Ok((ce / n, hits as f64 / n))
}

/// Vocabulary in first-occurrence order over the training corpus.
pub fn build_vocab(corpus: &[(Vec<String>, String)]) -> Vec<String> {
    let mut seen = indexmap::IndexSet::new();
    for (tokens, _) in corpus {
        for t in tokens {
            seen.insert(t.clone());
        }
    }
    seen.into_iter().collect()
}

/// Trains by shuffled mini-batch gradient descent, keeping the snapshot with
/// the lowest dev cross-entropy and stopping after `patience` epochs without
/// improvement. With an empty dev set the training loss is monitored
/// instead.
pub fn train_evec(
    corpus: &[(Vec<String>, String)],
    dev: &[(Vec<String>, String)],
    cfg: &EvecConfig,
) -> Result<EvecTraining> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::InvalidInput("empty training corpus".into()));
    }
    let class_of = |label: &str| -> Result<usize> {
        cfg.classes
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::InvalidInput(format!("label '{label}' is not a configured class")))
    };
    let mut present = vec![false; cfg.classes.len()];
    for (_, label) in corpus {
        present[class_of(label)?] = true;
    }
    let absent: Vec<&str> = cfg
        .classes
        .iter()
        .zip(&present)
        .filter(|(_, p)| !**p)
        .map(|(c, _)| c.as_str())
        .collect();
    if !absent.is_empty() {
        return Err(Error::InvalidInput(format!(
            "classes absent from corpus: {}",
            absent.join(", ")
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = EvecModel::init(build_vocab(corpus), cfg, &mut rng)?;
    let min_len = model.max_width();
    let (train, dev) = {
        let index = model.vocab_index();
        let enc = |set: &[(Vec<String>, String)]| -> Result<Vec<(Vec<usize>, usize)>> {
            set.iter()
                .map(|(t, l)| Ok((encode_with(&index, t, min_len), class_of(l)?)))
                .collect()
        };
        (enc(corpus)?, enc(dev)?)
    };
    let monitor = |m: &EvecModel| -> Result<(f64, f64)> {
        if dev.is_empty() {
            evaluate(m, &train)
        } else {
            evaluate(m, &dev)
        }
    };

    let mut best = (monitor(&model)?.0, model.clone(), 0usize);
    let mut history = Vec::new();
    let mut stale = 0;
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch) {
            let batch: Vec<(Vec<usize>, usize)> = chunk.iter().map(|&i| train[i].clone()).collect();
            let (loss, g) = loss_and_gradients(&model, &batch, cfg.l2)?;
            if !loss.is_finite() {
                return Err(Error::Divergence { iteration: epoch });
            }
            loss_sum += loss * chunk.len() as f64;
            apply_step(&mut model, &g, cfg.lr);
        }
        let (dev_loss, dev_accuracy) = monitor(&model)?;
        history.push(EpochStats {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            dev_loss,
            dev_accuracy,
        });
        if dev_loss < best.0 {
            best = (dev_loss, model.clone(), epoch);
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience.max(1) {
                break;
            }
        }
    }
    Ok(EvecTraining {
        model: best.1,
        history,
        best_epoch: best.2,
    })
}

/// One vector per vocabulary token; padding is not exported.
pub fn export_vectors(model: &EvecModel) -> WordVectorTable {
    let mut table = WordVectorTable::new(model.emb_dim).expect("positive dimension");
    for (i, tok) in model.vocab.iter().enumerate() {
        table
            .insert(tok.clone(), model.embedding(i + 1).to_vec())
            .expect("vocabulary tokens are unique");
    }
    table
}
