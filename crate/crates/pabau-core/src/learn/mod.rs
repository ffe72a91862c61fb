//! Per-label binary classifiers over binary feature vectors.
//!
//! Five algorithms share one [`Model`] representation contract: `predict`
//! returns a real-valued score and the decision is `score > 0` (for logistic
//! regression the score is the logit, so this is `probability > 0.5`).
//! Training with fewer than one example per class degenerates to a constant
//! classifier rather than an error, since real ground truths may lack
//! positives for a label.

mod bayes;
mod linear;
mod tree;

pub use bayes::train_naive_bayes;
pub use linear::{
    logistic_gradient, logistic_loss, svm_objective, train_logistic, train_svm, LogisticConfig,
    SvmConfig,
};
pub use tree::{train_stump, train_tree, TreeConfig};

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::feature::FeatureVector;
use crate::label::Label;
use crate::rng::SplitMix64;

/// Feature vectors sharing one catalog, with per-label boolean targets kept
/// alongside by the caller.
#[derive(Debug, Clone)]
pub struct TrainingMatrix {
    pub catalog_id: u64,
    pub width: usize,
    pub vectors: Vec<FeatureVector>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LearnError {
    CatalogMismatch { expected: u64, got: u64 },
    EmptyTrainingSet,
}

impl fmt::Display for LearnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearnError::CatalogMismatch { expected, got } => {
                write!(f, "feature vector catalog {got:#x} does not match model catalog {expected:#x}")
            }
            LearnError::EmptyTrainingSet => f.write_str("empty training set"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LearnError {}

impl TrainingMatrix {
    pub fn new(catalog_id: u64, width: usize) -> Self {
        TrainingMatrix { catalog_id, width, vectors: Vec::new() }
    }

    pub fn push(&mut self, vector: FeatureVector) -> Result<(), LearnError> {
        if vector.catalog_id != self.catalog_id {
            return Err(LearnError::CatalogMismatch {
                expected: self.catalog_id,
                got: vector.catalog_id,
            });
        }
        self.vectors.push(vector);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn bit(&self, row: usize, col: usize) -> bool {
        self.vectors[row].get(col)
    }
}

/// A trained per-label binary model.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    /// Bernoulli Naive Bayes with Laplace smoothing; score is the posterior
    /// log-odds.
    NaiveBayes {
        prior_log_odds: f64,
        /// Per feature: (log-likelihood-ratio when set, when clear).
        feature_log_ratios: Vec<(f64, f64)>,
    },
    /// Score is the logit.
    Logistic { weights: Vec<f64>, bias: f64 },
    /// Single-feature split; per-side score is `2 * P(positive | side) - 1`.
    Stump { feature: u32, score_if_set: f64, score_if_clear: f64 },
    /// Gain-ratio decision tree; leaves score like stumps.
    Tree { nodes: Vec<TreeNode> },
    /// Linear SVM; score is the margin.
    Svm { weights: Vec<f64>, bias: f64 },
    /// Degenerate single-class training.
    Constant { decision: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Split { feature: u32, if_clear: u32, if_set: u32 },
    Leaf { score: f64 },
}

impl Model {
    /// Scores a vector; the decision is `score > 0`.
    pub fn score(&self, v: &FeatureVector) -> f64 {
        match self {
            Model::NaiveBayes { prior_log_odds, feature_log_ratios } => {
                let mut s = *prior_log_odds;
                for (i, (on, off)) in feature_log_ratios.iter().enumerate() {
                    s += if v.get(i) { *on } else { *off };
                }
                s
            }
            Model::Logistic { weights, bias } | Model::Svm { weights, bias } => {
                let mut s = *bias;
                for i in v.ones() {
                    if i < weights.len() {
                        s += weights[i];
                    }
                }
                s
            }
            Model::Stump { feature, score_if_set, score_if_clear } => {
                if v.get(*feature as usize) {
                    *score_if_set
                } else {
                    *score_if_clear
                }
            }
            Model::Tree { nodes } => {
                let mut at = 0usize;
                loop {
                    match &nodes[at] {
                        TreeNode::Leaf { score } => return *score,
                        TreeNode::Split { feature, if_clear, if_set } => {
                            at = if v.get(*feature as usize) { *if_set } else { *if_clear }
                                as usize;
                        }
                    }
                }
            }
            Model::Constant { decision } => {
                if *decision {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn predict(&self, v: &FeatureVector) -> (bool, f64) {
        let s = self.score(v);
        (s > 0.0, s)
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Model::Constant { .. })
    }
}

/// Returns the constant fallback when the targets are single-class.
pub(crate) fn degenerate_check(targets: &[bool]) -> Option<Model> {
    let positives = targets.iter().filter(|&&t| t).count();
    if positives == 0 {
        Some(Model::Constant { decision: false })
    } else if positives == targets.len() {
        Some(Model::Constant { decision: true })
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    NaiveBayes,
    Logistic,
    Stump,
    Tree,
    Svm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::NaiveBayes,
        Algorithm::Logistic,
        Algorithm::Stump,
        Algorithm::Tree,
        Algorithm::Svm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::NaiveBayes => "nb",
            Algorithm::Logistic => "logistic",
            Algorithm::Stump => "stump",
            Algorithm::Tree => "tree",
            Algorithm::Svm => "svm",
        }
    }

    /// Display name used in comparison tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Algorithm::NaiveBayes => "NaiveBayes",
            Algorithm::Logistic => "Logistic Reg",
            Algorithm::Stump => "Stump",
            Algorithm::Tree => "C4.5",
            Algorithm::Svm => "SVM",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownAlgorithm;

impl fmt::Display for UnknownAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unknown algorithm (expected nb, logistic, stump, tree, or svm)")
    }
}

#[cfg(feature = "std")]
impl std::error::Error for UnknownAlgorithm {}

impl FromStr for Algorithm {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL.iter().copied().find(|a| a.as_str() == s).ok_or(UnknownAlgorithm)
    }
}

/// Documented hyperparameter defaults; every field is overridable.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    pub nb_alpha: f64,
    pub logistic: LogisticConfig,
    pub svm: SvmConfig,
    pub tree: TreeConfig,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            nb_alpha: 1.0,
            logistic: LogisticConfig::default(),
            svm: SvmConfig::default(),
            tree: TreeConfig::default(),
        }
    }
}

/// Trains one model for one label with the chosen algorithm.
pub fn train_label_model(
    algorithm: Algorithm,
    matrix: &TrainingMatrix,
    indices: &[usize],
    targets: &[bool],
    hyper: &Hyperparams,
    rng: &mut SplitMix64,
) -> Model {
    match algorithm {
        Algorithm::NaiveBayes => train_naive_bayes(matrix, indices, targets, hyper.nb_alpha),
        Algorithm::Logistic => train_logistic(matrix, indices, targets, &hyper.logistic),
        Algorithm::Stump => train_stump(matrix, indices, targets),
        Algorithm::Tree => train_tree(matrix, indices, targets, &hyper.tree),
        Algorithm::Svm => train_svm(matrix, indices, targets, &hyper.svm, rng),
    }
}

/// Training provenance persisted with a bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainMeta {
    pub seed: u64,
    pub dataset_hash: u64,
    pub hyperparams: Hyperparams,
}

/// One trained model per label, all sharing a catalog.
#[derive(Debug, Clone)]
pub struct LabelModelBundle {
    pub catalog_id: u64,
    pub algorithm: Algorithm,
    /// Indexed by [`Label::index`].
    pub models: Vec<Model>,
    pub meta: TrainMeta,
}

impl LabelModelBundle {
    /// Trains all 16 label models. `targets[label.index()]` is the boolean
    /// column for that label; labels train independently, each on its own
    /// derived RNG stream.
    pub fn train(
        algorithm: Algorithm,
        matrix: &TrainingMatrix,
        targets: &[Vec<bool>],
        hyper: &Hyperparams,
        seed: u64,
        dataset_hash: u64,
    ) -> Result<Self, LearnError> {
        if matrix.is_empty() {
            return Err(LearnError::EmptyTrainingSet);
        }
        assert_eq!(targets.len(), Label::ALL.len());
        let indices: Vec<usize> = (0..matrix.len()).collect();
        let base = SplitMix64::new(seed);
        let models = Label::ALL
            .iter()
            .map(|label| {
                let mut rng = base.derive(label.index() as u64);
                train_label_model(
                    algorithm,
                    matrix,
                    &indices,
                    &targets[label.index()],
                    hyper,
                    &mut rng,
                )
            })
            .collect();
        Ok(LabelModelBundle {
            catalog_id: matrix.catalog_id,
            algorithm,
            models,
            meta: TrainMeta { seed, dataset_hash, hyperparams: hyper.clone() },
        })
    }

    pub fn model_for(&self, label: Label) -> &Model {
        &self.models[label.index()]
    }
}

/// Identity of the classified method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodIdentity {
    pub owner: String,
    pub name: String,
    pub descriptor: String,
}

/// Per-method classification outcome.
#[derive(Debug, Clone)]
pub struct LabelAssignment {
    pub identity: MethodIdentity,
    /// (label, decision, score) for all 16 labels, in `Label::ALL` order.
    /// BSC decisions here are raw, before exclusivity resolution.
    pub decisions: Vec<(Label, bool, f64)>,
    /// At most one of BSC1/2/3: the positively-decided BSC label with the
    /// highest score, ties to the lowest strength class.
    pub resolved_bsc: Option<Label>,
}

impl LabelAssignment {
    /// Labels reported for the method: all positive non-BSC labels plus the
    /// resolved BSC label.
    pub fn assigned_labels(&self) -> impl Iterator<Item = (Label, f64)> + '_ {
        self.decisions.iter().filter_map(move |&(label, decision, score)| {
            if label.is_bsc() {
                (self.resolved_bsc == Some(label)).then_some((label, score))
            } else {
                decision.then_some((label, score))
            }
        })
    }
}

/// Classifies one feature vector against every label model.
pub fn classify(
    bundle: &LabelModelBundle,
    identity: MethodIdentity,
    vector: &FeatureVector,
) -> Result<LabelAssignment, LearnError> {
    if vector.catalog_id != bundle.catalog_id {
        return Err(LearnError::CatalogMismatch {
            expected: bundle.catalog_id,
            got: vector.catalog_id,
        });
    }
    let decisions: Vec<(Label, bool, f64)> = Label::ALL
        .iter()
        .map(|&label| {
            let (d, s) = bundle.model_for(label).predict(vector);
            (label, d, s)
        })
        .collect();
    let resolved_bsc = decisions
        .iter()
        .filter(|(label, decision, _)| label.is_bsc() && *decision)
        .fold(None::<(Label, f64)>, |best, &(label, _, score)| match best {
            Some((_, best_score)) if best_score >= score => best,
            _ => Some((label, score)),
        })
        .map(|(label, _)| label);
    Ok(LabelAssignment { identity, decisions, resolved_bsc })
}

/// A boxed predictor, used by the evaluation harness so tests can inject
/// reference classifiers.
pub type Predictor = Box<dyn Fn(usize, &FeatureVector) -> (bool, f64)>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature::FeatureVector;

    pub(crate) fn vector(catalog_id: u64, bits: &[bool]) -> FeatureVector {
        let mut v = FeatureVector::new(catalog_id, bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub(crate) fn matrix(rows: &[&[bool]]) -> TrainingMatrix {
        let width = rows.first().map_or(0, |r| r.len());
        let mut m = TrainingMatrix::new(1, width);
        for row in rows {
            m.push(vector(1, row)).unwrap();
        }
        m
    }

    #[test]
    fn bsc_resolution_argmax_with_tie_to_lowest() {
        let bundle = LabelModelBundle {
            catalog_id: 1,
            algorithm: Algorithm::Stump,
            models: Label::ALL
                .iter()
                .map(|l| match l {
                    Label::Bsc2 => Model::Stump { feature: 0, score_if_set: 0.9, score_if_clear: 0.9 },
                    Label::Bsc3 => Model::Stump { feature: 0, score_if_set: 0.4, score_if_clear: 0.4 },
                    _ => Model::Constant { decision: false },
                })
                .collect(),
            meta: TrainMeta { seed: 0, dataset_hash: 0, hyperparams: Hyperparams::default() },
        };
        let v = vector(1, &[true]);
        let ident = MethodIdentity {
            owner: "a.B".into(),
            name: "m".into(),
            descriptor: "()V".into(),
        };
        let a = classify(&bundle, ident.clone(), &v).unwrap();
        assert_eq!(a.resolved_bsc, Some(Label::Bsc2));

        // All BSC negative -> no resolved BSC.
        let bundle2 = LabelModelBundle {
            models: Label::ALL.iter().map(|_| Model::Constant { decision: false }).collect(),
            ..bundle
        };
        let a2 = classify(&bundle2, ident, &v).unwrap();
        assert_eq!(a2.resolved_bsc, None);
        assert_eq!(a2.assigned_labels().count(), 0);
    }

    #[test]
    fn bsc_tie_breaks_to_lowest_number() {
        let bundle = LabelModelBundle {
            catalog_id: 1,
            algorithm: Algorithm::Stump,
            models: Label::ALL
                .iter()
                .map(|l| match l {
                    Label::Bsc1 | Label::Bsc3 => {
                        Model::Stump { feature: 0, score_if_set: 0.5, score_if_clear: 0.5 }
                    }
                    _ => Model::Constant { decision: false },
                })
                .collect(),
            meta: TrainMeta { seed: 0, dataset_hash: 0, hyperparams: Hyperparams::default() },
        };
        let v = vector(1, &[true]);
        let ident = MethodIdentity { owner: "a.B".into(), name: "m".into(), descriptor: "()V".into() };
        let a = classify(&bundle, ident, &v).unwrap();
        assert_eq!(a.resolved_bsc, Some(Label::Bsc1));
    }

    #[test]
    fn catalog_mismatch_fails_fast() {
        let bundle = LabelModelBundle {
            catalog_id: 1,
            algorithm: Algorithm::Svm,
            models: Label::ALL.iter().map(|_| Model::Constant { decision: false }).collect(),
            meta: TrainMeta { seed: 0, dataset_hash: 0, hyperparams: Hyperparams::default() },
        };
        let v = vector(2, &[true]);
        let ident = MethodIdentity { owner: "a.B".into(), name: "m".into(), descriptor: "()V".into() };
        assert!(matches!(
            classify(&bundle, ident, &v),
            Err(LearnError::CatalogMismatch { .. })
        ));
    }

    #[test]
    fn bsc_argmax_invariant_under_positive_scaling() {
        // Scores (0.9, 0.4) and (9.0, 4.0) resolve identically.
        for scale in [1.0_f64, 10.0, 0.25] {
            let bundle = LabelModelBundle {
                catalog_id: 1,
                algorithm: Algorithm::Stump,
                models: Label::ALL
                    .iter()
                    .map(|l| match l {
                        Label::Bsc2 => Model::Stump {
                            feature: 0,
                            score_if_set: 0.9 * scale,
                            score_if_clear: 0.9 * scale,
                        },
                        Label::Bsc3 => Model::Stump {
                            feature: 0,
                            score_if_set: 0.4 * scale,
                            score_if_clear: 0.4 * scale,
                        },
                        _ => Model::Constant { decision: false },
                    })
                    .collect(),
                meta: TrainMeta { seed: 0, dataset_hash: 0, hyperparams: Hyperparams::default() },
            };
            let v = vector(1, &[true]);
            let ident =
                MethodIdentity { owner: "a.B".into(), name: "m".into(), descriptor: "()V".into() };
            assert_eq!(classify(&bundle, ident, &v).unwrap().resolved_bsc, Some(Label::Bsc2));
        }
    }
}
