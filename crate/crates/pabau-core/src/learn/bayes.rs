//! Bernoulli Naive Bayes with Laplace smoothing.

use super::{degenerate_check, Model, TrainingMatrix};

/// Trains on the rows selected by `indices`; `targets` is aligned with the
/// full matrix. `alpha` is the add-`alpha` smoothing constant.
pub fn train_naive_bayes(
    matrix: &TrainingMatrix,
    indices: &[usize],
    targets: &[bool],
    alpha: f64,
) -> Model {
    let selected: alloc::vec::Vec<bool> = indices.iter().map(|&i| targets[i]).collect();
    if let Some(constant) = degenerate_check(&selected) {
        return constant;
    }
    let n_pos = selected.iter().filter(|&&t| t).count() as f64;
    let n_neg = selected.len() as f64 - n_pos;

    let prior_log_odds = libm::log(n_pos / n_neg);
    let mut feature_log_ratios = alloc::vec::Vec::with_capacity(matrix.width);
    for col in 0..matrix.width {
        let mut set_pos = 0.0;
        let mut set_neg = 0.0;
        for &row in indices {
            if matrix.bit(row, col) {
                if targets[row] {
                    set_pos += 1.0;
                } else {
                    set_neg += 1.0;
                }
            }
        }
        let p_pos = (set_pos + alpha) / (n_pos + 2.0 * alpha);
        let p_neg = (set_neg + alpha) / (n_neg + 2.0 * alpha);
        let on = libm::log(p_pos) - libm::log(p_neg);
        let off = libm::log(1.0 - p_pos) - libm::log(1.0 - p_neg);
        feature_log_ratios.push((on, off));
    }
    Model::NaiveBayes { prior_log_odds, feature_log_ratios }
}
