use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label co-occurrence counts: `o[(i, j)]` samples carry both labels i and j.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceStats {
    pub o: DMatrix<u64>,
}

impl CooccurrenceStats {
    pub fn as_f64(&self) -> DMatrix<f64> {
        self.o.map(|v| v as f64)
    }
}

/// `O = YᵀY` for a binary label matrix.
pub fn cooccurrence(y: &[Vec<bool>], n_labels: usize) -> Result<CooccurrenceStats> {
    let mut o = DMatrix::<u64>::zeros(n_labels, n_labels);
    for row in y {
        if row.len() != n_labels {
            return Err(Error::Dimension {
                expected: n_labels,
                got: row.len(),
            });
        }
        let on: Vec<usize> = (0..n_labels).filter(|&j| row[j]).collect();
        for &a in &on {
            for &b in &on {
                o[(a, b)] += 1;
            }
        }
    }
    Ok(CooccurrenceStats { o })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelGraph {
    /// Squared distances between co-occurrence rows.
    pub a: DMatrix<f64>,
    /// Diagonal of the degree matrix.
    pub degree: Vec<f64>,
    pub l: DMatrix<f64>,
}

impl LabelGraph {
    pub fn n_labels(&self) -> usize {
        self.l.nrows()
    }

    /// `yᵀ L y`.
    pub fn quadratic_form(&self, y: &[f64]) -> f64 {
        let c = self.n_labels();
        let mut s = 0.0;
        for i in 0..c {
            for j in 0..c {
                s += y[i] * self.l[(i, j)] * y[j];
            }
        }
        s
    }
}

/// Builds `A_ij = ‖O_i − O_j‖²`, `D = diag(row sums of A)`, `L = D − A`.
pub fn laplacian(o: &DMatrix<f64>) -> Result<LabelGraph> {
    let c = o.nrows();
    if o.ncols() != c {
        return Err(Error::Dimension {
            expected: c,
            got: o.ncols(),
        });
    }
    let mut a = DMatrix::<f64>::zeros(c, c);
    for i in 0..c {
        for j in i + 1..c {
            let d: f64 = (0..c).map(|k| (o[(i, k)] - o[(j, k)]).powi(2)).sum();
            a[(i, j)] = d;
            a[(j, i)] = d;
        }
    }
    let degree: Vec<f64> = (0..c).map(|i| a.row(i).sum()).collect();
    let mut l = -a.clone();
    for i in 0..c {
        l[(i, i)] += degree[i];
    }
    Ok(LabelGraph { a, degree, l })
}
