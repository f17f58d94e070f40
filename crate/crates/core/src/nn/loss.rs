use crate::label::Label;

pub(crate) const MIN_PROB: f64 = 1e-12;

/// Row-wise softmax of a row-major `n x classes` logit matrix, stabilized by
/// subtracting each row's maximum.
pub fn softmax_rows(logits: &[f64], classes: usize) -> Vec<f64> {
    let mut out = logits.to_vec();
    for row in out.chunks_exact_mut(classes) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for x in row.iter_mut() {
            *x = (*x - max).exp();
            sum += *x;
        }
        row.iter_mut().for_each(|x| *x /= sum);
    }
    out
}

/// Class-weighted cross-entropy averaged over rows:
/// `(1/n) * sum_r w[y_r] * -ln(max(p[r, y_r], 1e-12))`.
///
/// `probs` is row-major `n x 2` (Same, Split); `weights` is `[w_same, w_split]`.
pub fn loss(probs: &[f64], labels: &[Label], weights: [f64; 2]) -> f64 {
    assert_eq!(probs.len(), 2 * labels.len(), "probability rows vs labels");
    if labels.is_empty() {
        return 0.0;
    }
    let total: f64 = labels
        .iter()
        .zip(probs.chunks_exact(2))
        .map(|(y, p)| {
            let c = y.index();
            -weights[c] * p[c].max(MIN_PROB).ln()
        })
        .sum();
    total / labels.len() as f64
}
