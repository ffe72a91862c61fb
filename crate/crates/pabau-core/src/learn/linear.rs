//! Linear models: logistic regression and a linear SVM.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{degenerate_check, Model, TrainingMatrix};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub l2: f64,
    pub epochs: u32,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig { learning_rate: 0.1, l2: 1e-4, epochs: 200 }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// Full-batch gradient descent on L2-regularized log loss. Deterministic:
/// the update order is fixed by the matrix, so no RNG is involved.
pub fn train_logistic(
    matrix: &TrainingMatrix,
    indices: &[usize],
    targets: &[bool],
    cfg: &LogisticConfig,
) -> Model {
    let selected: Vec<bool> = indices.iter().map(|&i| targets[i]).collect();
    if let Some(constant) = degenerate_check(&selected) {
        return constant;
    }
    // Cached set-bit indices per row: the gradient touches only the sparse
    // support, but sums in the same order as `logistic_gradient`.
    let ones: Vec<Vec<u32>> = indices
        .iter()
        .map(|&row| matrix.vectors[row].ones().map(|i| i as u32).collect())
        .collect();
    let n = indices.len() as f64;
    let mut weights = vec![0.0f64; matrix.width];
    let mut bias = 0.0f64;
    let mut grad_w = vec![0.0f64; matrix.width];
    for _ in 0..cfg.epochs {
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0f64;
        for (pos, &row) in indices.iter().enumerate() {
            let mut z = bias;
            for &col in &ones[pos] {
                z += weights[col as usize];
            }
            let y = if targets[row] { 1.0 } else { 0.0 };
            let err = sigmoid(z) - y;
            for &col in &ones[pos] {
                grad_w[col as usize] += err / n;
            }
            grad_b += err / n;
        }
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= cfg.learning_rate * (g + cfg.l2 * *w);
        }
        bias -= cfg.learning_rate * grad_b;
    }
    Model::Logistic { weights, bias }
}

/// Gradient of the mean log loss plus L2 penalty (bias unregularized).
/// Exposed so tests can check it against finite differences of
/// [`logistic_loss`].
pub fn logistic_gradient(
    matrix: &TrainingMatrix,
    indices: &[usize],
    targets: &[bool],
    weights: &[f64],
    bias: f64,
    l2: f64,
) -> (Vec<f64>, f64) {
    let n = indices.len() as f64;
    let mut grad_w = vec![0.0f64; weights.len()];
    let mut grad_b = 0.0f64;
    for &row in indices {
        let mut z = bias;
        for col in matrix.vectors[row].ones() {
            z += weights[col];
        }
        let y = if targets[row] { 1.0 } else { 0.0 };
        let err = sigmoid(z) - y;
        for col in matrix.vectors[row].ones() {
            grad_w[col] += err / n;
        }
        grad_b += err / n;
    }
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g += l2 * w;
    }
    (grad_w, grad_b)
}

/// Mean log loss plus L2 penalty; the objective whose gradient
/// [`logistic_gradient`] computes.
pub fn logistic_loss(
    matrix: &TrainingMatrix,
    indices: &[usize],
    targets: &[bool],
    weights: &[f64],
    bias: f64,
    l2: f64,
) -> f64 {
    let n = indices.len() as f64;
    let mut loss = 0.0;
    for &row in indices {
        let mut z = bias;
        for col in matrix.vectors[row].ones() {
            z += weights[col];
        }
        // log(1 + exp(-m)) computed stably.
        let m = if targets[row] { z } else { -z };
        loss += if m > 0.0 { libm::log1p(libm::exp(-m)) } else { -m + libm::log1p(libm::exp(m)) };
    }
    loss /= n;
    loss + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: u32,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig { lambda: 1e-2, epochs: 200 }
    }
}

/// Stochastic subgradient descent on the weighted hinge loss with a
/// Pegasos-style `1/(lambda t)` step schedule.
///
/// Examples are deduplicated into (vector, target) groups with multiplicity
/// weights, combined with inverse-class-frequency weights and normalized.
/// Sampling then draws from the normalized distribution, which makes the
/// trained model invariant under duplicating the training set.
pub fn train_svm(
    matrix: &TrainingMatrix,
    indices: &[usize],
    targets: &[bool],
    cfg: &SvmConfig,
    rng: &mut SplitMix64,
) -> Model {
    let selected: Vec<bool> = indices.iter().map(|&i| targets[i]).collect();
    if let Some(constant) = degenerate_check(&selected) {
        return constant;
    }
    let n = indices.len() as f64;
    let n_pos = selected.iter().filter(|&&t| t).count() as f64;
    let n_neg = n - n_pos;
    let class_weight = |positive: bool| if positive { n / (2.0 * n_pos) } else { n / (2.0 * n_neg) };

    // Deduplicate: key = (bits, target), value = (representative row, count).
    let mut groups: BTreeMap<(Vec<u64>, bool), (usize, f64)> = BTreeMap::new();
    for &row in indices {
        let key = (matrix.vectors[row].ones().map(|i| i as u64).collect::<Vec<u64>>(), targets[row]);
        let entry = groups.entry(key).or_insert((row, 0.0));
        entry.1 += 1.0;
    }
    let examples: Vec<(usize, bool, f64)> = groups
        .into_iter()
        .map(|((_, positive), (row, count))| (row, positive, count * class_weight(positive)))
        .collect();
    let example_ones: Vec<Vec<u32>> = examples
        .iter()
        .map(|&(row, _, _)| matrix.vectors[row].ones().map(|i| i as u32).collect())
        .collect();
    let total_weight: f64 = examples.iter().map(|e| e.2).sum();
    // Cumulative distribution for weighted sampling.
    let mut cdf = Vec::with_capacity(examples.len());
    let mut acc = 0.0;
    for e in &examples {
        acc += e.2 / total_weight;
        cdf.push(acc);
    }

    let steps_per_epoch = examples.len().max(1);
    let mut weights = vec![0.0f64; matrix.width];
    let mut bias = 0.0f64;
    let mut avg_weights = vec![0.0f64; matrix.width];
    let mut avg_bias = 0.0f64;
    let mut t: u64 = 0;
    for _ in 0..cfg.epochs {
        let mut epoch_w = vec![0.0f64; matrix.width];
        let mut epoch_b = 0.0f64;
        for _ in 0..steps_per_epoch {
            t += 1;
            let eta = 1.0 / (cfg.lambda * t as f64);
            let u = rng.next_f64();
            let idx = cdf.partition_point(|&c| c < u).min(examples.len() - 1);
            let (_, positive, _) = examples[idx];
            let y = if positive { 1.0 } else { -1.0 };
            let mut margin = bias;
            for &col in &example_ones[idx] {
                margin += weights[col as usize];
            }
            let violated = y * margin < 1.0;
            for w in weights.iter_mut() {
                *w *= 1.0 - eta * cfg.lambda;
            }
            if violated {
                for &col in &example_ones[idx] {
                    weights[col as usize] += eta * y;
                }
                bias += eta * y * 0.01;
            }
            for (e, w) in epoch_w.iter_mut().zip(&weights) {
                *e += w;
            }
            epoch_b += bias;
        }
        for (a, e) in avg_weights.iter_mut().zip(&epoch_w) {
            *a = e / steps_per_epoch as f64;
        }
        avg_bias = epoch_b / steps_per_epoch as f64;
    }
    // Report the final epoch's averaged iterate.
    Model::Svm { weights: avg_weights, bias: avg_bias }
}

/// Weighted SVM objective: `lambda/2 ||w||^2` plus the class-weighted mean
/// hinge loss. Exposed for the objective-trace checks.
pub fn svm_objective(
    matrix: &TrainingMatrix,
    indices: &[usize],
    targets: &[bool],
    weights: &[f64],
    bias: f64,
    lambda: f64,
) -> f64 {
    let n = indices.len() as f64;
    let n_pos = indices.iter().filter(|&&i| targets[i]).count() as f64;
    let n_neg = n - n_pos;
    let mut loss = 0.0;
    for &row in indices {
        let y = if targets[row] { 1.0 } else { -1.0 };
        let cw = if targets[row] { n / (2.0 * n_pos) } else { n / (2.0 * n_neg) };
        let mut margin = bias;
        for col in matrix.vectors[row].ones() {
            margin += weights[col];
        }
        loss += cw * (1.0 - y * margin).max(0.0);
    }
    0.5 * lambda * weights.iter().map(|w| w * w).sum::<f64>() + loss / n
}
