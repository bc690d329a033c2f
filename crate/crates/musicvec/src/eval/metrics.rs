//! Rank-correlation and ranking-quality metrics.

use super::EvalError;

/// Fractional (average-tie) ranks, 1-based: ties receive the mean of the
/// positions they occupy, so [10, 20, 20, 30] ranks as [1, 2.5, 2.5, 4].
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end averaged over the tie run.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation: the Pearson correlation of the fractional
/// ranks of `x` and `y`. Returns `DegenerateInput` when either list is
/// constant (including lists shorter than 2), where the value is undefined.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    assert_eq!(x.len(), y.len(), "spearman inputs must have equal length");
    if x.len() < 2 {
        return Err(EvalError::DegenerateInput(format!(
            "need at least 2 observations, got {}",
            x.len()
        )));
    }
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return Err(EvalError::DegenerateInput(
            "rank correlation is undefined for a constant list".into(),
        ));
    }
    let rx = fractional_ranks(x);
    let ry = fractional_ranks(y);
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0; // ranks always average to (n+1)/2
    let mut dot = 0.0;
    let mut ssx = 0.0;
    let mut ssy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        let da = a - mean;
        let db = b - mean;
        dot += da * db;
        ssx += da * da;
        ssy += db * db;
    }
    Ok((dot / (ssx * ssy).sqrt()).clamp(-1.0, 1.0))
}

/// Normalized discounted cumulative gain at `k` over non-negative
/// relevances listed in predicted rank order. DCG@k = Σ rel_i/log2(i+1) for
/// 1-based positions i ≤ min(k, n); the ideal DCG uses the same relevances
/// sorted descending. Returns 0 when the ideal DCG is 0 (all relevances 0).
pub fn ndcg_at_k(predicted_relevances: &[f64], k: usize) -> f64 {
    assert!(k >= 1, "ndcg requires k >= 1");
    debug_assert!(
        predicted_relevances.iter().all(|&r| r >= 0.0),
        "relevances must be non-negative"
    );
    let dcg = |rels: &[f64]| -> f64 {
        rels.iter()
            .take(k)
            .enumerate()
            .map(|(i, &rel)| rel / ((i + 2) as f64).log2())
            .sum()
    };
    let mut ideal = predicted_relevances.to_vec();
    ideal.sort_by(|a, b| b.total_cmp(a));
    let idcg = dcg(&ideal);
    if idcg == 0.0 {
        0.0
    } else {
        (dcg(predicted_relevances) / idcg).min(1.0)
    }
}
