//! Repeated stratified k-fold cross-validation with per-label
//! precision/recall.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::feature::FeatureVector;
use crate::label::Label;
use crate::learn::{train_label_model, Algorithm, Hyperparams, TrainingMatrix};
use crate::rng::SplitMix64;

/// Assignment of record indices to folds for one (label, repeat) pair.
#[derive(Debug, Clone)]
pub struct FoldPlan {
    pub k: usize,
    /// fold index per record.
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] != fold).collect()
    }
}

/// Stratified fold assignment: positives and negatives are shuffled and dealt
/// round-robin, negatives continuing where the positives stopped so overall
/// fold sizes differ by at most one.
pub fn stratified_folds(targets: &[bool], k: usize, rng: &mut SplitMix64) -> FoldPlan {
    let mut positives: Vec<usize> = (0..targets.len()).filter(|&i| targets[i]).collect();
    let mut negatives: Vec<usize> = (0..targets.len()).filter(|&i| !targets[i]).collect();
    rng.shuffle(&mut positives);
    rng.shuffle(&mut negatives);
    let mut assignment = alloc::vec![0usize; targets.len()];
    let mut fold = 0usize;
    for &i in positives.iter().chain(&negatives) {
        assignment[i] = fold;
        fold = (fold + 1) % k;
    }
    FoldPlan { k, assignment }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn add_prediction(&mut self, actual: bool, predicted: bool) {
        match (actual, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn merge(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }

    /// `None` when no positive predictions were made (the 0/0 case is
    /// reported as undefined, never as 0 or 1).
    pub fn precision(&self) -> Option<f64> {
        let denom = self.tp + self.fp;
        (denom > 0).then(|| self.tp as f64 / denom as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        let denom = self.tp + self.fn_;
        (denom > 0).then(|| self.tp as f64 / denom as f64)
    }
}

/// One accumulated confusion per (algorithm, label, repeat).
#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub algorithm: String,
    pub label: Label,
    pub repeat: u32,
    pub counts: Confusion,
}

#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub k: usize,
    pub repeats: u32,
    pub seed: u64,
    pub rows: Vec<MetricsRow>,
    pub warnings: Vec<String>,
}

/// Mean and median over defined per-repeat values; `excluded` counts the
/// undefined repeats left out of the aggregates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub excluded: usize,
}

fn aggregate(values: impl Iterator<Item = Option<f64>>) -> Aggregate {
    let mut defined: Vec<f64> = Vec::new();
    let mut excluded = 0usize;
    for v in values {
        match v {
            Some(x) => defined.push(x),
            None => excluded += 1,
        }
    }
    if defined.is_empty() {
        return Aggregate { mean: None, median: None, excluded };
    }
    defined.sort_by(|a, b| a.partial_cmp(b).expect("metrics are finite"));
    let mean = defined.iter().sum::<f64>() / defined.len() as f64;
    let mid = defined.len() / 2;
    let median = if defined.len() % 2 == 1 {
        defined[mid]
    } else {
        (defined[mid - 1] + defined[mid]) / 2.0
    };
    Aggregate { mean: Some(mean), median: Some(median), excluded }
}

impl MetricsReport {
    fn repeat_values<'a>(
        &'a self,
        algorithm: &'a str,
        label: Label,
        f: impl Fn(&Confusion) -> Option<f64> + 'a,
    ) -> impl Iterator<Item = Option<f64>> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.algorithm == algorithm && r.label == label)
            .map(move |r| f(&r.counts))
    }

    pub fn precision(&self, algorithm: &str, label: Label) -> Aggregate {
        aggregate(self.repeat_values(algorithm, label, Confusion::precision))
    }

    pub fn recall(&self, algorithm: &str, label: Label) -> Aggregate {
        aggregate(self.repeat_values(algorithm, label, Confusion::recall))
    }

    /// Mean-of-means across the given labels; labels whose mean is undefined
    /// are excluded.
    pub fn average_over_labels(
        &self,
        algorithm: &str,
        labels: &[Label],
        precision: bool,
    ) -> Option<f64> {
        let vals: Vec<f64> = labels
            .iter()
            .filter_map(|&l| {
                if precision {
                    self.precision(algorithm, l).mean
                } else {
                    self.recall(algorithm, l).mean
                }
            })
            .collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }

    pub fn algorithms(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for row in &self.rows {
            if !names.contains(&row.algorithm) {
                names.push(row.algorithm.clone());
            }
        }
        names
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    TooFewRecords { records: usize, k: usize },
    BadFoldCount { k: usize },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::TooFewRecords { records, k } => {
                write!(f, "{records} records cannot be split into {k} folds")
            }
            EvalError::BadFoldCount { k } => write!(f, "fold count must be >= 2, got {k}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EvalError {}

/// A per-fold predictor; takes the record's global index and its vector.
pub type FoldPredictor = Box<dyn Fn(usize, &FeatureVector) -> (bool, f64)>;

/// Trains a predictor for one label on one training fold. Implemented by the
/// real algorithms and by reference classifiers in tests.
pub trait FoldTrainer {
    fn name(&self) -> String;

    fn train(
        &self,
        matrix: &TrainingMatrix,
        train_indices: &[usize],
        targets: &[bool],
        rng: &mut SplitMix64,
    ) -> FoldPredictor;
}

/// The standard trainer backed by one of the five algorithms.
pub struct AlgorithmTrainer {
    pub algorithm: Algorithm,
    pub hyper: Hyperparams,
}

impl FoldTrainer for AlgorithmTrainer {
    fn name(&self) -> String {
        String::from(self.algorithm.display_name())
    }

    fn train(
        &self,
        matrix: &TrainingMatrix,
        train_indices: &[usize],
        targets: &[bool],
        rng: &mut SplitMix64,
    ) -> FoldPredictor {
        let model =
            train_label_model(self.algorithm, matrix, train_indices, targets, &self.hyper, rng);
        Box::new(move |_idx, v| model.predict(v))
    }
}

/// Runs `repeats` stratified k-fold cross-validations for every
/// (trainer, label) pair. Fold plans depend only on (seed, label, repeat), so
/// every trainer sees identical folds.
pub fn cross_validate(
    matrix: &TrainingMatrix,
    targets: &[Vec<bool>],
    labels: &[Label],
    trainers: &[&dyn FoldTrainer],
    k: usize,
    repeats: u32,
    seed: u64,
) -> Result<MetricsReport, EvalError> {
    if k < 2 {
        return Err(EvalError::BadFoldCount { k });
    }
    if matrix.len() < k {
        return Err(EvalError::TooFewRecords { records: matrix.len(), k });
    }
    let base = SplitMix64::new(seed);
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for &label in labels {
        let label_targets = &targets[label.index()];
        let positives = label_targets.iter().filter(|&&t| t).count();
        if positives < 2 || label_targets.len() - positives < 2 {
            warnings.push(format!(
                "label {label}: fewer than 2 examples in one class; folds will be degenerate"
            ));
        }
        for repeat in 0..repeats {
            let mut fold_rng = base.derive(label.index() as u64).derive(repeat as u64);
            let plan = stratified_folds(label_targets, k, &mut fold_rng);
            for (t_idx, trainer) in trainers.iter().enumerate() {
                let mut counts = Confusion::default();
                for fold in 0..k {
                    let train_idx = plan.train_indices(fold);
                    let test_idx = plan.test_indices(fold);
                    let mut train_rng = base
                        .derive(0x5eed ^ label.index() as u64)
                        .derive(repeat as u64)
                        .derive((fold as u64) << 8 | t_idx as u64);
                    let predictor = trainer.train(matrix, &train_idx, label_targets, &mut train_rng);
                    for &i in &test_idx {
                        let (predicted, _) = predictor(i, &matrix.vectors[i]);
                        counts.add_prediction(label_targets[i], predicted);
                    }
                }
                rows.push(MetricsRow { algorithm: trainer.name(), label, repeat, counts });
            }
        }
    }
    Ok(MetricsReport { k, repeats, seed, rows, warnings })
}
