//! ε-insensitive support vector regression.
//!
//! The dual over `z = [α; α*] ∈ [0, C]^{2M}` is
//!
//! ```text
//! min ½ (α - α*)ᵀ K (α - α*) + ε Σ (α + α*) - yᵀ (α - α*)
//! s.t. Σ α = Σ α*
//! ```
//!
//! and is solved two variables at a time, picking the maximal violating
//! index first and its partner by second-order gain.

use nalgebra::DMatrix;

use super::{check_training_set, kernel_matrix, Kernel, KernelModel, Method};
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrOptions {
    /// Stop once the maximal KKT violation falls below this.
    pub tol: f64,
    /// Cap on pair updates.
    pub max_iter: usize,
}

impl Default for SvrOptions {
    fn default() -> Self {
        SvrOptions {
            tol: 1e-3,
            max_iter: 100_000,
        }
    }
}

pub fn fit_svr(x: &DMatrix<f64>, y: &[f64], kernel: Kernel, c: f64, epsilon: f64) -> Result<KernelModel> {
    fit_svr_with(x, y, kernel, c, epsilon, &SvrOptions::default())
}

pub fn fit_svr_with(
    x: &DMatrix<f64>,
    y: &[f64],
    kernel: Kernel,
    c: f64,
    epsilon: f64,
    opts: &SvrOptions,
) -> Result<KernelModel> {
    check_training_set(x, y, 2)?;
    kernel.validate()?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidInput(format!("C must be positive, got {c}")));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "epsilon must be non-negative, got {epsilon}"
        )));
    }

    let l = y.len();
    let k = kernel_matrix(&kernel, x);
    let solution = solve(&k, y, c, epsilon, opts)?;

    let mut rows = Vec::new();
    let mut coeffs = Vec::new();
    for i in 0..l {
        let beta = solution.alpha[i] - solution.alpha[i + l];
        if beta != 0.0 {
            rows.push(i);
            coeffs.push(beta);
        }
    }
    let support_inputs = if rows.is_empty() {
        DMatrix::zeros(0, x.ncols())
    } else {
        x.select_rows(&rows)
    };
    Ok(KernelModel {
        method: Method::Svr { c, epsilon },
        kernel,
        support_inputs,
        dual_coeffs: coeffs,
        bias: -solution.rho,
    })
}

struct Solution {
    alpha: Vec<f64>,
    rho: f64,
}

fn solve(k: &DMatrix<f64>, y: &[f64], c: f64, eps: f64, opts: &SvrOptions) -> Result<Solution> {
    let l = y.len();
    let n = 2 * l;
    let sign = |t: usize| if t < l { 1.0 } else { -1.0 };
    let sample = |t: usize| if t < l { t } else { t - l };
    // Q[t, s] = sign(t) sign(s) K[sample(t), sample(s)]
    let q = |t: usize, s: usize| sign(t) * sign(s) * k[(sample(t), sample(s))];
    let qd: Vec<f64> = (0..n).map(|t| k[(sample(t), sample(t))]).collect();

    let mut alpha = vec![0.0; n];
    let mut grad: Vec<f64> = (0..n)
        .map(|t| if t < l { eps - y[t] } else { eps + y[t - l] })
        .collect();

    let mut iter = 0;
    loop {
        // first index: maximal violation among variables that can move up
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let movable = if sign(t) > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
            if movable && -sign(t) * grad[t] >= gmax {
                gmax = -sign(t) * grad[t];
                i_sel = Some(t);
            }
        }

        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut obj_min = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                let movable = if sign(t) > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
                if !movable {
                    continue;
                }
                let yg = sign(t) * grad[t];
                if yg >= gmax2 {
                    gmax2 = yg;
                }
                let grad_diff = gmax + yg;
                if grad_diff > 0.0 {
                    let mut quad = qd[i] + qd[t] - 2.0 * sign(i) * sign(t) * q(i, t);
                    if quad <= 0.0 {
                        quad = TAU;
                    }
                    let obj = -(grad_diff * grad_diff) / quad;
                    if obj <= obj_min {
                        obj_min = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }

        let violation = gmax + gmax2;
        let (i, j) = match (i_sel, j_sel) {
            (Some(i), Some(j)) if violation >= opts.tol => (i, j),
            _ => break,
        };
        if iter >= opts.max_iter {
            return Err(Error::Convergence {
                iterations: iter,
                violation,
            });
        }
        iter += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = q(i, j);
        if sign(i) != sign(j) {
            let mut quad = qd[i] + qd[j] + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = qd[i] + qd[j] - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q(t, i) * di + q(t, j) * dj;
        }
    }

    // bias from free variables; midpoint of the feasible interval otherwise
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut n_free = 0usize;
    for t in 0..n {
        let yg = sign(t) * grad[t];
        if alpha[t] >= c {
            if sign(t) < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if sign(t) > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    Ok(Solution { alpha, rho })
}
