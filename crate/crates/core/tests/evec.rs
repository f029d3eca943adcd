mod common;

use affect_core::evec::{export_vectors, forward, loss_and_gradients, train_evec, EvecConfig, EvecModel, PAD};
use common::{rel_err, rng};
use nalgebra::DMatrix;
use rand::seq::IndexedRandom;
use rand::Rng;

fn small_cfg() -> EvecConfig {
    EvecConfig {
        emb_dim: 5,
        filter_widths: vec![2, 3],
        filters_per_width: 3,
        ..EvecConfig::default()
    }
}

fn vocab(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{i}")).collect()
}

/// Mutable view of every scalar parameter, in a fixed order, with a group
/// name for reporting.
fn params(m: &mut EvecModel) -> Vec<(&'static str, &mut f64)> {
    let d = m.emb_dim;
    let mut out: Vec<(&'static str, &mut f64)> = Vec::new();
    for v in m.embeddings[d..].iter_mut() {
        out.push(("embeddings", v));
    }
    for bank in m.convs.iter_mut() {
        for v in bank.weights.iter_mut() {
            out.push(("conv weights", v));
        }
        for v in bank.bias.iter_mut() {
            out.push(("conv bias", v));
        }
    }
    for v in m.out_weights.iter_mut() {
        out.push(("output weights", v));
    }
    for v in m.out_bias.iter_mut() {
        out.push(("output bias", v));
    }
    out
}

fn flat_gradient(m: &EvecModel, batch: &[(Vec<usize>, usize)], l2: f64) -> Vec<f64> {
    let (_, g) = loss_and_gradients(m, batch, l2).unwrap();
    let d = m.emb_dim;
    let mut out = Vec::new();
    for row in 1..m.n_rows() {
        match g.embeddings.get(&row) {
            Some(v) => out.extend(v),
            None => out.extend(std::iter::repeat_n(0.0, d)),
        }
    }
    for (w, b) in g.conv_weights.iter().zip(&g.conv_bias) {
        out.extend(w);
        out.extend(b);
    }
    out.extend(&g.out_weights);
    out.extend(&g.out_bias);
    out
}

#[test]
fn gradients_match_central_differences() {
    let mut r = rng(41);
    let cfg = small_cfg();
    for trial in 0..3 {
        let model = EvecModel::init(vocab(6), &cfg, &mut r).unwrap();
        let batch: Vec<(Vec<usize>, usize)> = (0..2)
            .map(|_| {
                let len = r.random_range(3..=6);
                ((0..len).map(|_| r.random_range(1..=6)).collect(), r.random_range(0..4))
            })
            .collect();
        let l2 = 0.01;
        let analytic = flat_gradient(&model, &batch, l2);
        let h = 1e-4;
        let mut probe = model.clone();
        let n = params(&mut probe).len();
        assert_eq!(n, analytic.len());
        for k in 0..n {
            let orig = *params(&mut probe)[k].1;
            *params(&mut probe)[k].1 = orig + h;
            let up = loss_and_gradients(&probe, &batch, l2).unwrap().0;
            *params(&mut probe)[k].1 = orig - h;
            let down = loss_and_gradients(&probe, &batch, l2).unwrap().0;
            *params(&mut probe)[k].1 = orig;
            let fd = (up - down) / (2.0 * h);
            let group = params(&mut probe)[k].0;
            assert!(
                rel_err(analytic[k], fd) <= 1e-3,
                "trial {trial} {group} #{k}: analytic {} fd {fd}",
                analytic[k]
            );
        }
    }
}

#[test]
fn non_argmax_positions_do_not_move_pooled_values() {
    let mut r = rng(42);
    let model = EvecModel::init(vocab(10), &small_cfg(), &mut r).unwrap();
    let seq: Vec<usize> = (1..=10).collect();
    let base = forward(&model, &seq).unwrap();
    let d = model.emb_dim;
    let mut fi = 0;
    for bank in &model.convs {
        for _ in 0..bank.n_filters() {
            let t = base.argmax[fi];
            let outside: Vec<usize> = (0..seq.len()).filter(|p| *p < t || *p >= t + bank.width).collect();
            for &p in &outside {
                for sign in [1.0, -1.0] {
                    let mut m = model.clone();
                    let row = seq[p];
                    for e in 0..d {
                        m.embeddings[row * d + e] += sign * 1e-4;
                    }
                    let moved = forward(&m, &seq).unwrap();
                    assert_eq!(moved.pooled[fi], base.pooled[fi]);
                }
            }
            fi += 1;
        }
    }
}

#[test]
fn fresh_model_is_near_uniform() {
    let mut r = rng(43);
    let model = EvecModel::init(vocab(50), &EvecConfig::default(), &mut r).unwrap();
    for _ in 0..100 {
        let len = r.random_range(1..=12);
        let seq: Vec<usize> = (0..len.max(5)).map(|_| r.random_range(0..=50)).collect();
        let fw = forward(&model, &seq).unwrap();
        assert!((fw.probs.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        let ce = -fw.probs[0].ln();
        assert!((ce - 4f64.ln()).abs() <= 0.15, "{ce}");
    }
}

#[test]
fn padding_row_stays_zero_through_training() {
    let (train, dev) = cue_corpus(44, 60);
    let cfg = EvecConfig {
        emb_dim: 8,
        filters_per_width: 4,
        epochs: 3,
        ..EvecConfig::default()
    };
    let m = train_evec(&train, &dev, &cfg).unwrap().model;
    assert!(m.embedding(PAD).iter().all(|&v| v == 0.0));
}

const FILLER: &[&str] = &[
    "the", "a", "today", "my", "this", "is", "so", "and", "was", "just", "it", "when", "we", "they", "morning",
    "night", "work", "home", "people", "again",
];
const CUES: &[(&str, &[&str])] = &[
    ("joy", &["yay", "woohoo"]),
    ("sadness", &["sob", "sniff"]),
    ("anger", &["grr", "growl"]),
    ("fear", &["eek", "yikes"]),
];

/// Documents of filler words plus one class-specific cue word.
fn cue_corpus(seed: u64, n: usize) -> (Vec<(Vec<String>, String)>, Vec<(Vec<String>, String)>) {
    let mut r = rng(seed);
    let mut make = |count: usize| -> Vec<(Vec<String>, String)> {
        (0..count)
            .map(|i| {
                let (label, cues) = CUES[i % 4];
                let len = r.random_range(5..=9);
                let mut toks: Vec<String> = (0..len).map(|_| FILLER.choose(&mut r).unwrap().to_string()).collect();
                let at = r.random_range(0..=toks.len());
                toks.insert(at, cues.choose(&mut r).unwrap().to_string());
                (toks, label.to_string())
            })
            .collect()
    };
    let train = make(n);
    let dev = make(n / 4);
    (train, dev)
}

/// One-vs-rest bag-of-words logistic regression, confirming the corpus is
/// separable before asking the network to learn it.
fn bow_oracle_accuracy(train: &[(Vec<String>, String)], dev: &[(Vec<String>, String)]) -> f64 {
    let vocab: Vec<&str> = FILLER
        .iter()
        .chain(CUES.iter().flat_map(|c| c.1.iter()))
        .copied()
        .collect();
    let featurize = |set: &[(Vec<String>, String)]| {
        DMatrix::from_fn(set.len(), vocab.len(), |i, j| {
            set[i].0.iter().filter(|t| *t == vocab[j]).count() as f64
        })
    };
    let (tx, dx) = (featurize(train), featurize(dev));
    let models: Vec<(Vec<f64>, f64)> = CUES
        .iter()
        .map(|(label, _)| {
            let y: Vec<bool> = train.iter().map(|d| d.1 == *label).collect();
            common::logistic_oracle(&tx, &y, 1e-3, 0.5, 500)
        })
        .collect();
    let mut hits = 0;
    for (i, doc) in dev.iter().enumerate() {
        let row: Vec<f64> = dx.row(i).iter().copied().collect();
        let best = (0..4)
            .max_by(|&a, &b| {
                let s = |k: usize| common::dot(&models[k].0, &row) + models[k].1;
                s(a).total_cmp(&s(b))
            })
            .unwrap();
        hits += usize::from(CUES[best].0 == doc.1);
    }
    hits as f64 / dev.len() as f64
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    common::dot(a, b) / (common::dot(a, a).sqrt() * common::dot(b, b).sqrt())
}

fn cue_cfg() -> EvecConfig {
    EvecConfig {
        emb_dim: 32,
        filters_per_width: 16,
        epochs: 15,
        ..EvecConfig::default()
    }
}

#[test]
fn learns_cue_words() {
    let (train, dev) = cue_corpus(45, 200);
    let oracle = bow_oracle_accuracy(&train, &dev);
    assert!(oracle >= 0.95, "oracle accuracy {oracle}");

    let run = train_evec(&train, &dev, &cue_cfg()).unwrap();
    let best = run.history.iter().find(|h| h.epoch == run.best_epoch).unwrap();
    assert!(best.dev_accuracy >= 0.95, "dev accuracy {}", best.dev_accuracy);

    let losses: Vec<f64> = run.history.iter().take(5).map(|h| h.train_loss).collect();
    assert!(losses.windows(2).all(|w| w[1] < w[0]), "{losses:?}");

    let t = export_vectors(&run.model);
    let (grr, growl, yay) = (t.get("grr").unwrap(), t.get("growl").unwrap(), t.get("yay").unwrap());
    let same = cosine(grr, growl);
    let other = cosine(grr, yay);
    assert!(same > other + 0.2, "cos(grr,growl) {same} cos(grr,yay) {other}");
}

#[test]
fn training_is_deterministic() {
    let (train, dev) = cue_corpus(46, 80);
    let cfg = EvecConfig {
        emb_dim: 8,
        filters_per_width: 4,
        epochs: 3,
        ..EvecConfig::default()
    };
    let a = export_vectors(&train_evec(&train, &dev, &cfg).unwrap().model);
    let b = export_vectors(&train_evec(&train, &dev, &cfg).unwrap().model);
    assert_eq!(a, b);
    assert_eq!(a.len(), train_evec(&train, &dev, &cfg).unwrap().model.vocab.len());
}
