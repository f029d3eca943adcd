//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Each criterion also has a wall-clock budget.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use affect_core::dataio::{self, Emotion};
use affect_core::eval::{bias_audit, jaccard_multilabel, macro_average, pearson, BiasAxis, BiasPair};
use affect_core::evec::{loss_and_gradients, EvecConfig, EvecModel};
use affect_core::multilabel::{
    cooccurrence, label_matrix, laplacian, predict_rlr_batch, rlr_gradient, rlr_loss, train_rlr, RlrConfig,
};
use affect_core::ordmap::{fit_naive, fit_poly, fit_scope, MapperVariant, DEFAULT_POLY_DEGREE};
use affect_core::regress::{fit_krr, fit_svr, fit_svr_with, Kernel, KernelModel, SvrOptions};
use affect_core::textprep::segment_word;
use common::{brute_force_segment, central_diff, dot, gauss_solve, random_matrix, rel_err, ridge_primal, rng};
use indexmap::IndexMap;
use nalgebra::DMatrix;
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn random_labels(r: &mut impl Rng, m: usize, c: usize) -> Vec<Vec<bool>> {
    (0..m).map(|_| (0..c).map(|_| r.random_bool(0.4)).collect()).collect()
}

// ---------------------------------------------------------------- oracles

fn krr_vs_ridge() -> Result<f64, String> {
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let m = r.random_range(2..=30);
        let n = r.random_range(1..=10);
        let lambda = 10f64.powf(r.random_range(-2.0..1.0));
        let x = random_matrix(&mut r, m, n);
        let y: Vec<f64> = (0..m).map(|_| r.random_range(-1.0..1.0)).collect();
        let model = fit_krr(&x, &y, Kernel::Linear, lambda).map_err(|e| format!("case {case}: {e}"))?;
        let w = ridge_primal(&x, &y, lambda);
        let probe = random_matrix(&mut r, 5, n);
        let dual = model.predict(&probe).map_err(|e| e.to_string())?;
        for (i, d) in dual.iter().enumerate() {
            let row: Vec<f64> = probe.row(i).iter().copied().collect();
            worst = worst.max((d - dot(&w, &row)).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("KRR/ridge gap {worst:.2e}"))?;
    Ok(worst)
}

fn rlr_vs_least_squares() -> Result<f64, String> {
    let mut r = rng(102);
    let (m, n, c) = (40, 5, 3);
    let x = random_matrix(&mut r, m, n);
    let labels = random_labels(&mut r, m, c);
    let y = label_matrix(&labels).map_err(|e| e.to_string())?;
    let l = laplacian(&cooccurrence(&labels, c).unwrap().as_f64()).unwrap().l;
    let cfg = RlrConfig {
        lambda: 0.0,
        iters: 20_000,
        ..RlrConfig::default()
    };
    let model = train_rlr(&x, &y, &l, &cfg).map_err(|e| e.to_string())?.model;
    let (scores, decided) = predict_rlr_batch(&model, &x).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for j in 0..c {
        let mut a = vec![vec![0.0; n]; n];
        let mut b = vec![0.0; n];
        for p in 0..n {
            for q in 0..n {
                a[p][q] = (0..m).map(|i| x[(i, p)] * x[(i, q)]).sum();
            }
            b[p] = (0..m).map(|i| x[(i, p)] * y[(i, j)]).sum();
        }
        let w = gauss_solve(a, b);
        for i in 0..m {
            let ls: f64 = (0..n).map(|p| w[p] * x[(i, p)]).sum();
            worst = worst.max((scores[i][j] - ls).abs());
            ensure(decided[i][j] == (ls >= 0.5), || {
                format!("decision differs at label {j} row {i}")
            })?;
        }
    }
    ensure(worst <= 1e-3, || format!("RLR/LS gap {worst:.2e}"))?;
    Ok(worst)
}

/// Words of the shipped corpora: vocabulary entries and hashtag bodies.
fn fixture_words() -> Result<(Vec<(String, u64)>, Vec<String>), String> {
    let dir = fixtures();
    let freq = dataio::read_word_freq(&dir.join("word_freq.tsv")).map_err(|e| e.to_string())?;
    let table: Vec<(String, u64)> = freq.iter().map(|(w, c)| (w.to_string(), c)).collect();
    let mut words: Vec<String> = table.iter().map(|(w, _)| w.clone()).collect();
    for name in ["hashtag_train.tsv", "hashtag_dev.tsv"] {
        for doc in dataio::read_hashtag_corpus(&dir.join(name)).map_err(|e| e.to_string())? {
            words.extend(
                doc.text
                    .split_whitespace()
                    .filter_map(|t| t.strip_prefix('#'))
                    .map(String::from),
            );
        }
    }
    words.retain(|w| w.chars().count() <= 12);
    words.sort();
    words.dedup();
    Ok((table, words))
}

fn segmentation_vs_brute_force() -> Result<usize, String> {
    let (table, words) = fixture_words()?;
    let pairs: Vec<(&str, u64)> = table.iter().map(|(w, c)| (w.as_str(), *c)).collect();
    let freq = common::word_freq(&pairs);
    for w in &words {
        let dp = segment_word(w, &freq);
        let bf = brute_force_segment(w, &pairs);
        ensure(dp == bf, || format!("'{w}': dp {dp:?} vs exhaustive {bf:?}"))?;
    }
    Ok(words.len())
}

fn oracle_equivalences() -> Outcome {
    let krr = krr_vs_ridge()?;
    let rlr = rlr_vs_least_squares()?;
    let words = segmentation_vs_brute_force()?;
    Ok(format!(
        "KRR gap {krr:.1e}, RLR gap {rlr:.1e}, {words} words segmented identically"
    ))
}

// -------------------------------------------------------------- gradients

fn evec_params(m: &mut EvecModel) -> Vec<(&'static str, &mut f64)> {
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

fn evec_flat_gradient(m: &EvecModel, batch: &[(Vec<usize>, usize)], l2: f64) -> Vec<f64> {
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

fn evec_gradients() -> Result<(f64, usize), String> {
    let mut r = rng(201);
    let cfg = EvecConfig {
        emb_dim: 5,
        filter_widths: vec![2, 3],
        filters_per_width: 3,
        ..EvecConfig::default()
    };
    let vocab: Vec<String> = (0..6).map(|i| format!("w{i}")).collect();
    let h = 1e-4;
    let l2 = 0.01;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for _ in 0..3 {
        let model = EvecModel::init(vocab.clone(), &cfg, &mut r).map_err(|e| e.to_string())?;
        let batch: Vec<(Vec<usize>, usize)> = (0..2)
            .map(|_| {
                let len = r.random_range(3..=6);
                ((0..len).map(|_| r.random_range(1..=6)).collect(), r.random_range(0..4))
            })
            .collect();
        let analytic = evec_flat_gradient(&model, &batch, l2);
        let mut probe = model.clone();
        let n = evec_params(&mut probe).len();
        ensure(n == analytic.len(), || {
            format!("{n} parameters, {} gradient entries", analytic.len())
        })?;
        for k in 0..n {
            let orig = *evec_params(&mut probe)[k].1;
            *evec_params(&mut probe)[k].1 = orig + h;
            let up = loss_and_gradients(&probe, &batch, l2).unwrap().0;
            *evec_params(&mut probe)[k].1 = orig - h;
            let down = loss_and_gradients(&probe, &batch, l2).unwrap().0;
            *evec_params(&mut probe)[k].1 = orig;
            let e = rel_err(analytic[k], (up - down) / (2.0 * h));
            let group = evec_params(&mut probe)[k].0;
            ensure(e <= 1e-3, || format!("EVEC {group} #{k}: rel err {e:.2e}"))?;
            worst = worst.max(e);
            checked += 1;
        }
    }
    Ok((worst, checked))
}

fn rlr_gradients() -> Result<f64, String> {
    let mut r = rng(202);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (m, n, c) = (r.random_range(1..=20), r.random_range(1..=8), r.random_range(1..=5));
        let x = random_matrix(&mut r, m, n);
        let y = label_matrix(&random_labels(&mut r, m, c)).unwrap();
        let o = cooccurrence(&random_labels(&mut r, 15, c), c).unwrap().as_f64();
        let l = laplacian(&o).unwrap().l;
        let lambda = r.random_range(-0.01..0.01);
        let w = random_matrix(&mut r, c, n);
        let g = rlr_gradient(&w, &x, &y, &l, lambda).map_err(|e| e.to_string())?;
        for i in 0..c {
            for j in 0..n {
                let fd = central_diff(
                    |v| {
                        let mut wp = w.clone();
                        wp[(i, j)] = v;
                        rlr_loss(&wp, &x, &y, &l, lambda).unwrap()
                    },
                    w[(i, j)],
                    1e-5,
                );
                let e = rel_err(g[(i, j)], fd);
                ensure(e <= 1e-4, || format!("RLR W[{i},{j}]: rel err {e:.2e}"))?;
                worst = worst.max(e);
            }
        }
    }
    Ok(worst)
}

fn gradient_checks() -> Outcome {
    let (evec, n) = evec_gradients()?;
    let rlr = rlr_gradients()?;
    Ok(format!(
        "EVEC worst rel err {evec:.1e} over {n} parameters, RLR worst {rlr:.1e}"
    ))
}

// -------------------------------------------------------------- laplacian

fn laplacian_suite() -> Outcome {
    let mut r = rng(301);
    for case in 0..100 {
        let c = r.random_range(2..=8);
        let m = r.random_range(1..=30);
        let o = cooccurrence(&random_labels(&mut r, m, c), c).unwrap().as_f64();
        let g = laplacian(&o).map_err(|e| e.to_string())?;
        for i in 0..c {
            ensure(g.l.row(i).sum().abs() <= 1e-10, || format!("case {case}: row {i} sum"))?;
            for j in 0..c {
                ensure(g.l[(i, j)] == g.l[(j, i)], || format!("case {case}: asymmetric"))?;
            }
        }
        let y: Vec<f64> = (0..c).map(|_| r.random_range(-1.0..1.0)).collect();
        let q = g.quadratic_form(&y);
        let mut half = 0.0;
        for i in 0..c {
            for j in 0..c {
                half += 0.5 * g.a[(i, j)] * (y[i] - y[j]).powi(2);
            }
        }
        ensure((q - half).abs() <= 1e-10 * half.abs().max(1.0), || {
            format!("case {case}: {q} vs {half}")
        })?;
        ensure(q >= -1e-10, || format!("case {case}: negative form {q}"))?;
    }
    let g = laplacian(&DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0])).map_err(|e| e.to_string())?;
    ensure(g.a == DMatrix::from_row_slice(2, 2, &[0.0, 5.0, 5.0, 0.0]), || {
        format!("hand case A = {}", g.a)
    })?;
    ensure(g.l == DMatrix::from_row_slice(2, 2, &[5.0, -5.0, -5.0, 5.0]), || {
        format!("hand case L = {}", g.l)
    })?;
    Ok("100 random graphs plus the 2-label hand case".into())
}

// -------------------------------------------------------------------- svr

fn full_coeffs(model: &KernelModel, x: &DMatrix<f64>) -> Vec<f64> {
    (0..x.nrows())
        .map(|i| {
            (0..model.support_inputs.nrows())
                .find(|&s| model.support_inputs.row(s) == x.row(i))
                .map_or(0.0, |s| model.dual_coeffs[s])
        })
        .collect()
}

fn svr_kkt() -> Outcome {
    let mut r = rng(401);
    let (c, eps, tol) = (1.0, 0.1, 1e-3);
    for case in 0..10 {
        let m = 40;
        let x = random_matrix(&mut r, m, 3);
        let y: Vec<f64> = (0..m)
            .map(|i| (2.0 * x[(i, 0)]).sin() + 0.3 * x[(i, 1)] + r.random_range(-0.2..0.2))
            .collect();
        let model = fit_svr(&x, &y, Kernel::Rbf { gamma: 0.5 }, c, eps).map_err(|e| e.to_string())?;
        let beta = full_coeffs(&model, &x);
        let f = model.predict(&x).map_err(|e| e.to_string())?;
        ensure(beta.iter().all(|b| b.abs() <= c + 1e-9), || {
            format!("case {case}: box bound")
        })?;
        let s: f64 = beta.iter().sum();
        ensure(s.abs() <= 1e-6, || format!("case {case}: coefficient sum {s:.2e}"))?;
        for i in 0..m {
            let res = y[i] - f[i];
            if res.abs() < eps - tol {
                ensure(beta[i].abs() <= 1e-6, || {
                    format!("case {case}: interior point {i} has weight")
                })?;
            }
            if beta[i] > 1e-9 {
                ensure(res >= eps - tol, || format!("case {case}: upper slackness at {i}"))?;
            }
            if beta[i] < -1e-9 {
                ensure(res <= -eps + tol, || format!("case {case}: lower slackness at {i}"))?;
            }
            if beta[i].abs() > 1e-9 && beta[i].abs() < c - 1e-9 {
                ensure((res.abs() - eps).abs() <= tol, || {
                    format!("case {case}: free vector {i} off the tube")
                })?;
            }
        }
    }
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let x = random_matrix(&mut r, 30, 3);
        let w: Vec<f64> = (0..3).map(|_| r.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..30)
            .map(|i| (0..3).map(|k| w[k] * x[(i, k)]).sum::<f64>() + 1.0)
            .collect();
        let opts = SvrOptions {
            tol: 1e-9,
            ..SvrOptions::default()
        };
        let model = fit_svr_with(&x, &y, Kernel::Linear, 1000.0, eps, &opts).map_err(|e| e.to_string())?;
        let f = model.predict(&x).map_err(|e| e.to_string())?;
        for i in 0..30 {
            worst = worst.max((y[i] - f[i]).abs());
        }
    }
    ensure(worst <= eps + 1e-6, || format!("tube residual {worst}"))?;
    Ok(format!("10 KKT cases, tube residual max {worst:.6}"))
}

// ---------------------------------------------------------------- ordinal

fn ordinal_direction() -> Outcome {
    let mut r = rng(501);
    let bands = [(0.0, 0.6), (0.6, 0.75), (0.75, 0.88), (0.88, 1.0)];
    let pairs: Vec<(f64, i32)> = (0..400)
        .map(|i| {
            let class = [0, 0, 0, 1, 1, 2, 3][i % 7];
            let (lo, hi) = bands[class];
            (r.random_range(lo..hi), class as i32)
        })
        .collect();
    let ords = [0, 1, 2, 3];
    let naive = fit_naive(&ords).map_err(|e| e.to_string())?.accuracy(&pairs);
    let scope_m = fit_scope(&pairs, &ords).map_err(|e| e.to_string())?;
    let scope = scope_m.accuracy(&pairs);
    let poly = fit_poly(&pairs, &ords, DEFAULT_POLY_DEGREE)
        .map_err(|e| e.to_string())?
        .accuracy(&pairs);
    let detail = format!("naive {naive:.3}, scope {scope:.3}, poly {poly:.3}");
    ensure(scope >= naive && poly >= naive, || detail.clone())?;
    ensure(scope - naive >= 0.05, || detail.clone())?;
    if let MapperVariant::Scope { thresholds } = &scope_m.variant {
        ensure(thresholds[0] > 0.5, || format!("class-0 cut {}", thresholds[0]))?;
    }
    Ok(detail)
}

// -------------------------------------------------------------------- e2e

fn affect(dir: &Path, config: &Path, args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_affect"))
        .current_dir(dir)
        .arg("--config")
        .arg(config)
        .args(args)
        .output()
        .map_err(|e| format!("spawning affect: {e}"))?;
    if !out.status.success() {
        return Err(format!(
            "affect {} failed: {}",
            args.first().unwrap_or(&""),
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).trim().to_string())
}

struct PipelineRun {
    dev_pearson: f64,
    chain_jaccard: f64,
    files: BTreeMap<String, Vec<u8>>,
}

fn run_pipeline(dir: &Path) -> Result<PipelineRun, String> {
    let fx = fixtures();
    let mut cfg: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fx.join("config.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    // point the shared inputs at the fixtures and the learned vectors here
    for key in ["sentence_features", "word_freq"] {
        let rel = cfg["paths"][key].as_str().unwrap_or_default().to_string();
        cfg["paths"][key] = fx.join(rel).display().to_string().into();
    }
    cfg["paths"]["evec_vectors"] = dir.join("evec_vectors.tsv").display().to_string().into();
    cfg["paths"]["model_dir"] = dir.display().to_string().into();
    cfg["regression"]["grid"] = fx.join("grid.json").display().to_string().into();
    // score a model that never saw dev
    cfg["merge_train_dev"] = false.into();
    let config = dir.join("config.json");
    std::fs::write(&config, serde_json::to_string_pretty(&cfg).unwrap()).map_err(|e| e.to_string())?;

    let f = |name: &str| fx.join(name).display().to_string();
    let run = |args: &[&str]| affect(dir, &config, args);

    run(&[
        "evec-train",
        &f("hashtag_train.tsv"),
        "--dev",
        &f("hashtag_dev.tsv"),
        "--out",
        "evec.json",
    ])?;
    run(&["evec-export", "evec.json", "--out", "evec_vectors.tsv"])?;
    run(&["prep", &f("reg_dev.tsv"), "--out", "reg_dev.tok"])?;
    run(&[
        "featurize",
        &f("reg_train.tsv"),
        "--out",
        "reg_train.feat",
        "--fit-scaler",
        "scaler.json",
    ])?;
    for s in ["reg_dev", "bias"] {
        run(&[
            "featurize",
            &f(&format!("{s}.tsv")),
            "--out",
            &format!("{s}.feat"),
            "--scaler",
            "scaler.json",
        ])?;
    }
    run(&[
        "featurize",
        &f("ml_train.tsv"),
        "--out",
        "ml_train.feat",
        "--fit-scaler",
        "ml_scaler.json",
    ])?;
    run(&[
        "featurize",
        &f("ml_dev.tsv"),
        "--out",
        "ml_dev.feat",
        "--scaler",
        "ml_scaler.json",
    ])?;
    run(&[
        "reg-train",
        "--train",
        &f("reg_train.tsv"),
        "--train-features",
        "reg_train.feat",
        "--dev",
        &f("reg_dev.tsv"),
        "--dev-features",
        "reg_dev.feat",
        "--out",
        "reg.json",
        "--scores",
        "scores.json",
    ])?;
    run(&["reg-predict", "reg.json", "reg_dev.feat", "--out", "dev_pred.tsv"])?;
    run(&["reg-predict", "reg.json", "bias.feat", "--out", "bias_pred.tsv"])?;
    run(&[
        "reg-ensemble",
        "dev_pred.tsv",
        "--out",
        "dev_ens.tsv",
        "--select-with",
        &f("reg_dev.tsv"),
    ])?;
    run(&["eval", &f("reg_dev.tsv"), "dev_ens.tsv", "--json", "reg_report.json"])?;
    run(&[
        "ordmap-fit",
        "--train-intensity",
        &f("reg_train.tsv"),
        "--train",
        &f("oc_train.tsv"),
        "--dev-pred",
        "dev_ens.tsv",
        "--dev",
        &f("oc_dev.tsv"),
        "--out",
        "ordmap.json",
    ])?;
    run(&["ordmap-apply", "ordmap.json", "dev_ens.tsv", "--out", "oc_pred.tsv"])?;
    run(&["eval", &f("oc_dev.tsv"), "oc_pred.tsv", "--json", "oc_report.json"])?;
    run(&[
        "bias-audit",
        "bias_pred.tsv",
        &f("bias_pairs.tsv"),
        "--json",
        "bias.json",
    ])?;
    run(&[
        "ml-train-rlr",
        "--train",
        &f("ml_train.tsv"),
        "--features",
        "ml_train.feat",
        "--dev",
        &f("ml_dev.tsv"),
        "--dev-features",
        "ml_dev.feat",
        "--out",
        "rlr.json",
    ])?;
    run(&[
        "ml-train-cc",
        "--train",
        &f("ml_train.tsv"),
        "--features",
        "ml_train.feat",
        "--out",
        "chains.json",
    ])?;
    run(&[
        "ml-predict",
        &f("ml_dev.tsv"),
        "ml_dev.feat",
        "--chains",
        "chains.json",
        "--out",
        "ml_chains.tsv",
    ])?;
    run(&[
        "ml-predict",
        &f("ml_dev.tsv"),
        "ml_dev.feat",
        "--rlr",
        "rlr.json",
        "--chains",
        "chains.json",
        "--out",
        "ml_blend.tsv",
    ])?;
    run(&["eval", &f("ml_dev.tsv"), "ml_chains.tsv", "--json", "ml_report.json"])?;

    // read the reports back through the library
    let report = |name: &str| -> Result<serde_json::Value, String> {
        serde_json::from_str(&std::fs::read_to_string(dir.join(name)).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())
    };
    let dev_pearson = report("reg_report.json")?["macro_pearson"]
        .as_f64()
        .ok_or("no macro_pearson")?;
    let chain_jaccard = report("ml_report.json")?["jaccard"].as_f64().ok_or("no jaccard")?;

    // cross-check the reported Jaccard against the written label sets
    let (_, gold) = dataio::read_multilabel_dataset(&fx.join("ml_dev.tsv")).map_err(|e| e.to_string())?;
    let (_, pred) = dataio::read_multilabel_dataset(&dir.join("ml_chains.tsv")).map_err(|e| e.to_string())?;
    let g: Vec<Vec<bool>> = gold.iter().map(|d| d.multilabels.clone().unwrap()).collect();
    let p: Vec<Vec<bool>> = pred.iter().map(|d| d.multilabels.clone().unwrap()).collect();
    let j = jaccard_multilabel(&g, &p).map_err(|e| e.to_string())?;
    ensure((j - chain_jaccard).abs() < 1e-12, || {
        format!("report jaccard {chain_jaccard} vs files {j}")
    })?;

    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let entry = entry.map_err(|e| e.to_string())?;
        let name = entry.file_name().to_string_lossy().to_string();
        if name != "config.json" {
            files.insert(name, std::fs::read(entry.path()).map_err(|e| e.to_string())?);
        }
    }
    Ok(PipelineRun {
        dev_pearson,
        chain_jaccard,
        files,
    })
}

fn end_to_end() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut times = Vec::new();
    let mut timed = |dir: &Path| {
        let start = Instant::now();
        let out = run_pipeline(dir);
        times.push(start.elapsed().as_secs_f64());
        out
    };
    let first = timed(a.path())?;
    let second = timed(b.path())?;
    ensure(times.iter().all(|t| *t < 60.0), || {
        format!("pipeline runs took {times:.2?}s")
    })?;
    ensure(first.files.keys().eq(second.files.keys()), || {
        "reruns wrote different file sets".into()
    })?;
    for (name, bytes) in &first.files {
        ensure(second.files[name] == *bytes, || {
            format!("{name} differs between reruns")
        })?;
    }
    ensure(first.dev_pearson >= 0.95, || {
        format!("dev pearson {:.4}", first.dev_pearson)
    })?;
    ensure(first.chain_jaccard >= 0.95, || {
        format!("chain jaccard {:.4}", first.chain_jaccard)
    })?;
    Ok(format!(
        "dev pearson {:.4}, chain jaccard {:.4}, {} artifacts byte-identical across reruns, {:.2}s per run",
        first.dev_pearson,
        first.chain_jaccard,
        first.files.len(),
        times[0].max(times[1])
    ))
}

// ---------------------------------------------------------------- metrics

fn metric_values() -> Outcome {
    let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).map_err(|e| e.to_string())?;
    ensure((r - 0.9820).abs() <= 1e-4, || format!("pearson {r}"))?;
    let j = jaccard_multilabel(&[vec![false, true, true, false]], &[vec![false, false, true, true]])
        .map_err(|e| e.to_string())?;
    ensure(j == 1.0 / 3.0, || format!("jaccard {j}"))?;
    let m = macro_average(&[0.792, 0.709, 0.763, 0.732]).map_err(|e| e.to_string())?;
    ensure(format!("{m:.3}") == "0.749", || format!("macro average {m}"))?;
    Ok(format!("pearson {r:.4}, jaccard {j}, macro {m:.3}"))
}

fn bias_checks() -> Outcome {
    let pairs: Vec<BiasPair> = (0..20)
        .map(|i| BiasPair {
            id_a: format!("a{i}"),
            id_b: format!("b{i}"),
            axis: if i % 2 == 0 { BiasAxis::Gender } else { BiasAxis::Race },
            emotion: Emotion::Fear,
        })
        .collect();
    let mut same = IndexMap::new();
    let mut offset = IndexMap::new();
    for i in 0..20 {
        let s = 0.2 + 0.03 * i as f64;
        same.insert(format!("a{i}"), s);
        same.insert(format!("b{i}"), s);
        offset.insert(format!("a{i}"), s + 0.005);
        offset.insert(format!("b{i}"), s);
    }
    let zero = bias_audit(&same, &pairs).map_err(|e| e.to_string())?;
    ensure(zero.iter().all(|r| r.percent == 0.0), || {
        format!("swap-invariant model: {zero:?}")
    })?;
    let half = bias_audit(&offset, &pairs).map_err(|e| e.to_string())?;
    for r in &half {
        ensure((r.percent - 0.5).abs() <= 1e-9, || {
            format!("{}/{}: {}%", r.axis, r.emotion, r.percent)
        })?;
    }
    Ok(format!("{} groups at 0.0%, offset model at 0.5%", zero.len()))
}

// ------------------------------------------------------------------- main

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 8] = [
        ("oracle equivalences", Duration::from_secs(10), oracle_equivalences),
        ("gradient checks", Duration::from_secs(30), gradient_checks),
        ("laplacian suite", Duration::from_secs(5), laplacian_suite),
        ("svr kkt suite", Duration::from_secs(10), svr_kkt),
        ("ordinal mapping direction", Duration::from_secs(5), ordinal_direction),
        // two full pipeline runs, each held to 60 s inside the check
        ("end-to-end pipeline", Duration::from_secs(120), end_to_end),
        ("metric unit values", Duration::from_secs(5), metric_values),
        ("bias audit", Duration::from_secs(5), bias_checks),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let secs = took.as_secs_f64();
        let outcome = match outcome {
            Ok(d) if took > budget => Err(format!("{d}; took {secs:.2}s, budget {:.0}s", budget.as_secs_f64())),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.2}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} [{secs:.2}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
