//! Reference implementations used only to cross-check the library. None of
//! these call into the code under test.
#![allow(dead_code)]

use affect_core::dataio::WordFreq;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Gaussian elimination with partial pivoting on dense row vectors.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// `(XᵀX + λI) w = Xᵀy`, built with explicit loops.
pub fn ridge_primal(x: &DMatrix<f64>, y: &[f64], lambda: f64) -> Vec<f64> {
    let (m, n) = x.shape();
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = (0..m).map(|r| x[(r, i)] * x[(r, j)]).sum();
        }
        a[i][i] += lambda;
        b[i] = (0..m).map(|r| x[(r, i)] * y[r]).sum();
    }
    gauss_solve(a, b)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Unigram score of a segmentation, computed from raw counts.
fn unigram_score(segs: &[&str], freq: &[(&str, u64)]) -> f64 {
    let total: u64 = freq.iter().map(|p| p.1).sum();
    let n = total as f64;
    segs.iter()
        .map(|s| match freq.iter().find(|p| p.0 == *s) {
            Some(&(_, c)) => (c as f64 / n).ln(),
            None => (10.0 / (n * 1000f64.powi(s.chars().count() as i32))).ln(),
        })
        .sum()
}

/// Exhaustive search over all 2^(n-1) splits with the same tie rules:
/// higher score (beyond 1e-9), then fewer segments, then lexicographic.
pub fn brute_force_segment(word: &str, freq: &[(&str, u64)]) -> Vec<String> {
    let chars: Vec<(usize, char)> = word.char_indices().collect();
    let n = chars.len();
    if n == 0 {
        return vec![];
    }
    let mut best: Option<(f64, Vec<String>)> = None;
    for mask in 0u64..(1u64 << (n - 1)) {
        let mut segs = Vec::new();
        let mut start = 0;
        for i in 1..=n {
            if i == n || mask & (1 << (i - 1)) != 0 {
                let end = if i == n { word.len() } else { chars[i].0 };
                segs.push(&word[chars[start].0..end]);
                start = i;
            }
        }
        if segs.iter().any(|s| s.chars().count() > 24) {
            continue;
        }
        let score = unigram_score(&segs, freq);
        let owned: Vec<String> = segs.iter().map(|s| s.to_string()).collect();
        let replace = match &best {
            None => true,
            Some((bs, bsegs)) => {
                if score > bs + 1e-9 {
                    true
                } else if score < bs - 1e-9 {
                    false
                } else {
                    owned.len() < bsegs.len() || (owned.len() == bsegs.len() && owned < *bsegs)
                }
            }
        };
        if replace {
            best = Some((score, owned));
        }
    }
    best.unwrap().1
}

pub fn word_freq(pairs: &[(&str, u64)]) -> WordFreq {
    let mut f = WordFreq::new();
    for &(w, c) in pairs {
        f.add(w, c).unwrap();
    }
    f
}

/// `|analytic − numeric| / max(1, |numeric|)`.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / numeric.abs().max(1.0)
}

pub fn central_diff(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Sample Pearson correlation by the textbook formula.
pub fn pearson_direct(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Plain logistic regression by gradient descent, no chain inputs.
pub fn logistic_oracle(x: &DMatrix<f64>, y: &[bool], l2: f64, lr: f64, iters: usize) -> (Vec<f64>, f64) {
    let (m, n) = x.shape();
    let mut w = vec![0.0; n];
    let mut b = 0.0;
    for _ in 0..iters {
        let mut gw = vec![0.0; n];
        let mut gb = 0.0;
        for i in 0..m {
            let z: f64 = (0..n).map(|k| w[k] * x[(i, k)]).sum::<f64>() + b;
            let r = 1.0 / (1.0 + (-z).exp()) - if y[i] { 1.0 } else { 0.0 };
            for k in 0..n {
                gw[k] += r * x[(i, k)] / m as f64;
            }
            gb += r / m as f64;
        }
        for k in 0..n {
            w[k] -= lr * (gw[k] + l2 * w[k]);
        }
        b -= lr * gb;
    }
    (w, b)
}
