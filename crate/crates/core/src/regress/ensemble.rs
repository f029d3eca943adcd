use crate::error::{Error, Result};
use crate::eval::pearson;

/// Element-wise mean of equally long prediction vectors.
pub fn ensemble_average(predictions: &[&[f64]]) -> Result<Vec<f64>> {
    let first = predictions
        .first()
        .ok_or_else(|| Error::InvalidInput("nothing to average".into()))?;
    let n = first.len();
    if let Some(bad) = predictions.iter().find(|p| p.len() != n) {
        return Err(Error::Dimension {
            expected: n,
            got: bad.len(),
        });
    }
    let k = predictions.len() as f64;
    Ok((0..n)
        .map(|i| predictions.iter().map(|p| p[i]).sum::<f64>() / k)
        .collect())
}

/// Forward greedy selection of prediction sets by dev Pearson of their
/// running average. Each step adds the candidate giving the highest score
/// (ties to the smaller name) and stops once nothing strictly improves.
/// Returns selected names in the order they were added.
pub fn greedy_ensemble_select(candidates: &[(String, Vec<f64>)], dev_labels: &[f64]) -> Result<Vec<String>> {
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no ensemble candidates".into()));
    }
    for (name, p) in candidates {
        if p.len() != dev_labels.len() {
            return Err(Error::InvalidInput(format!(
                "candidate '{name}' has {} predictions for {} dev labels",
                p.len(),
                dev_labels.len()
            )));
        }
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[a].0.cmp(&candidates[b].0));

    let mut chosen: Vec<usize> = Vec::new();
    let mut sum = vec![0.0; dev_labels.len()];
    let mut current = f64::NEG_INFINITY;
    loop {
        let mut best: Option<(usize, f64)> = None;
        for &c in &order {
            if chosen.contains(&c) {
                continue;
            }
            let k = (chosen.len() + 1) as f64;
            let avg: Vec<f64> = sum.iter().zip(&candidates[c].1).map(|(s, p)| (s + p) / k).collect();
            let Ok(score) = pearson(&avg, dev_labels) else { continue };
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((c, score));
            }
        }
        match best {
            Some((c, score)) if score > current => {
                for (s, p) in sum.iter_mut().zip(&candidates[c].1) {
                    *s += p;
                }
                chosen.push(c);
                current = score;
            }
            _ => break,
        }
    }
    Ok(chosen.into_iter().map(|c| candidates[c].0.clone()).collect())
}
