//! Model-bundle persistence: one versioned JSON document per trained bundle.
//!
//! Weights are decimal arrays; the catalog content hash is stored as a hex
//! string (u64 does not fit a JSON number losslessly) and verified on load.
//! Constant models carry an explicit decision flag instead of their ±∞
//! score sentinel, which JSON cannot represent.

use std::path::Path;

use pabau_core::learn::{
    Algorithm, Hyperparams, LabelModelBundle, LogisticConfig, Model, SvmConfig, TrainMeta,
    TreeConfig, TreeNode,
};
use pabau_core::Label;
use serde::{Deserialize, Serialize};

pub const FORMAT: &str = "pabau-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
enum ModelDoc {
    #[serde(rename_all = "camelCase")]
    NaiveBayes { prior_log_odds: f64, feature_log_ratios: Vec<(f64, f64)> },
    Logistic { weights: Vec<f64>, bias: f64 },
    #[serde(rename_all = "camelCase")]
    Stump { feature: u32, score_if_set: f64, score_if_clear: f64 },
    Tree { nodes: Vec<NodeDoc> },
    Svm { weights: Vec<f64>, bias: f64 },
    Constant { decision: bool },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
enum NodeDoc {
    #[serde(rename_all = "camelCase")]
    Split { feature: u32, if_clear: u32, if_set: u32 },
    Leaf { score: f64 },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct LabelModelDoc {
    label: String,
    model: ModelDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct HyperDoc {
    nb_alpha: f64,
    logistic_learning_rate: f64,
    logistic_l2: f64,
    logistic_epochs: u32,
    svm_lambda: f64,
    svm_epochs: u32,
    tree_max_depth: u32,
    tree_min_leaf: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct BundleDoc {
    format: String,
    version: u32,
    catalog_id: String,
    algorithm: String,
    seed: u64,
    dataset_hash: String,
    hyperparams: HyperDoc,
    models: Vec<LabelModelDoc>,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelIoError {
    #[error("not a {FORMAT} document (found format `{0}`)")]
    WrongFormat(String),
    #[error("unsupported model format version {0} (expected {VERSION})")]
    WrongVersion(u32),
    #[error("model catalog {file} does not match the active lexicon catalog {active}")]
    CatalogMismatch { file: String, active: String },
    #[error("malformed model document: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn model_to_doc(m: &Model) -> ModelDoc {
    match m {
        Model::NaiveBayes { prior_log_odds, feature_log_ratios } => ModelDoc::NaiveBayes {
            prior_log_odds: *prior_log_odds,
            feature_log_ratios: feature_log_ratios.clone(),
        },
        Model::Logistic { weights, bias } => {
            ModelDoc::Logistic { weights: weights.clone(), bias: *bias }
        }
        Model::Stump { feature, score_if_set, score_if_clear } => ModelDoc::Stump {
            feature: *feature,
            score_if_set: *score_if_set,
            score_if_clear: *score_if_clear,
        },
        Model::Tree { nodes } => ModelDoc::Tree {
            nodes: nodes
                .iter()
                .map(|n| match n {
                    TreeNode::Split { feature, if_clear, if_set } => NodeDoc::Split {
                        feature: *feature,
                        if_clear: *if_clear,
                        if_set: *if_set,
                    },
                    TreeNode::Leaf { score } => NodeDoc::Leaf { score: *score },
                })
                .collect(),
        },
        Model::Svm { weights, bias } => ModelDoc::Svm { weights: weights.clone(), bias: *bias },
        Model::Constant { decision } => ModelDoc::Constant { decision: *decision },
    }
}

fn doc_to_model(d: ModelDoc) -> Model {
    match d {
        ModelDoc::NaiveBayes { prior_log_odds, feature_log_ratios } => {
            Model::NaiveBayes { prior_log_odds, feature_log_ratios }
        }
        ModelDoc::Logistic { weights, bias } => Model::Logistic { weights, bias },
        ModelDoc::Stump { feature, score_if_set, score_if_clear } => {
            Model::Stump { feature, score_if_set, score_if_clear }
        }
        ModelDoc::Tree { nodes } => Model::Tree {
            nodes: nodes
                .into_iter()
                .map(|n| match n {
                    NodeDoc::Split { feature, if_clear, if_set } => {
                        TreeNode::Split { feature, if_clear, if_set }
                    }
                    NodeDoc::Leaf { score } => TreeNode::Leaf { score },
                })
                .collect(),
        },
        ModelDoc::Svm { weights, bias } => Model::Svm { weights, bias },
        ModelDoc::Constant { decision } => Model::Constant { decision },
    }
}

/// Deterministic pretty JSON for a bundle.
pub fn render_bundle(bundle: &LabelModelBundle) -> String {
    let h = &bundle.meta.hyperparams;
    let doc = BundleDoc {
        format: FORMAT.to_string(),
        version: VERSION,
        catalog_id: format!("{:016x}", bundle.catalog_id),
        algorithm: bundle.algorithm.as_str().to_string(),
        seed: bundle.meta.seed,
        dataset_hash: format!("{:016x}", bundle.meta.dataset_hash),
        hyperparams: HyperDoc {
            nb_alpha: h.nb_alpha,
            logistic_learning_rate: h.logistic.learning_rate,
            logistic_l2: h.logistic.l2,
            logistic_epochs: h.logistic.epochs,
            svm_lambda: h.svm.lambda,
            svm_epochs: h.svm.epochs,
            tree_max_depth: h.tree.max_depth,
            tree_min_leaf: h.tree.min_leaf,
        },
        models: Label::ALL
            .iter()
            .map(|&l| LabelModelDoc {
                label: l.as_str().to_string(),
                model: model_to_doc(bundle.model_for(l)),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("bundle serializes");
    s.push('\n');
    s
}

pub fn save_bundle(bundle: &LabelModelBundle, path: &Path) -> Result<(), ModelIoError> {
    std::fs::write(path, render_bundle(bundle))?;
    Ok(())
}

/// Loads and verifies a bundle. `expected_catalog` is the hash of the active
/// lexicon's catalog; a mismatch is an error rather than a silent skew.
pub fn load_bundle(
    path: &Path,
    expected_catalog: Option<u64>,
) -> Result<LabelModelBundle, ModelIoError> {
    let text = std::fs::read_to_string(path)?;
    let doc: BundleDoc =
        serde_json::from_str(&text).map_err(|e| ModelIoError::Malformed(e.to_string()))?;
    if doc.format != FORMAT {
        return Err(ModelIoError::WrongFormat(doc.format));
    }
    if doc.version != VERSION {
        return Err(ModelIoError::WrongVersion(doc.version));
    }
    let catalog_id = u64::from_str_radix(&doc.catalog_id, 16)
        .map_err(|e| ModelIoError::Malformed(format!("catalogId: {e}")))?;
    if let Some(active) = expected_catalog {
        if active != catalog_id {
            return Err(ModelIoError::CatalogMismatch {
                file: doc.catalog_id,
                active: format!("{active:016x}"),
            });
        }
    }
    let algorithm = doc
        .algorithm
        .parse::<Algorithm>()
        .map_err(|e| ModelIoError::Malformed(e.to_string()))?;
    if doc.models.len() != Label::ALL.len() {
        return Err(ModelIoError::Malformed(format!(
            "expected {} label models, found {}",
            Label::ALL.len(),
            doc.models.len()
        )));
    }
    let mut models: Vec<Option<Model>> = (0..Label::ALL.len()).map(|_| None).collect();
    for lm in doc.models {
        let label = lm
            .label
            .parse::<Label>()
            .map_err(|_| ModelIoError::Malformed(format!("unknown label `{}`", lm.label)))?;
        if models[label.index()].is_some() {
            return Err(ModelIoError::Malformed(format!("duplicate model for {label}")));
        }
        models[label.index()] = Some(doc_to_model(lm.model));
    }
    let h = doc.hyperparams;
    Ok(LabelModelBundle {
        catalog_id,
        algorithm,
        models: models.into_iter().map(|m| m.expect("all 16 labels present")).collect(),
        meta: TrainMeta {
            seed: doc.seed,
            dataset_hash: u64::from_str_radix(&doc.dataset_hash, 16)
                .map_err(|e| ModelIoError::Malformed(format!("datasetHash: {e}")))?,
            hyperparams: Hyperparams {
                nb_alpha: h.nb_alpha,
                logistic: LogisticConfig {
                    learning_rate: h.logistic_learning_rate,
                    l2: h.logistic_l2,
                    epochs: h.logistic_epochs,
                },
                svm: SvmConfig { lambda: h.svm_lambda, epochs: h.svm_epochs },
                tree: TreeConfig { max_depth: h.tree_max_depth, min_leaf: h.tree_min_leaf },
            },
        },
    })
}
