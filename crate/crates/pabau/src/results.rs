//! Classification results file: JSON Lines, one line per reported method.

use pabau_core::learn::LabelAssignment;
use pabau_core::Label;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelScore {
    pub label: String,
    /// Absent for the ±∞ constant-model sentinel (JSON has no infinities).
    pub score: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResultLine {
    pub owner: String,
    pub method: String,
    pub descriptor: String,
    /// Assigned labels only (post BSC resolution), in label-index order.
    pub labels: Vec<LabelScore>,
    pub resolved_bsc: Option<String>,
}

impl ResultLine {
    pub fn from_assignment(a: &LabelAssignment) -> Self {
        ResultLine {
            owner: a.identity.owner.clone(),
            method: a.identity.name.clone(),
            descriptor: a.identity.descriptor.clone(),
            labels: a
                .assigned_labels()
                .map(|(label, score)| LabelScore {
                    label: label.as_str().to_string(),
                    score: score.is_finite().then_some(score),
                })
                .collect(),
            resolved_bsc: a.resolved_bsc.map(|l| l.as_str().to_string()),
        }
    }

    pub fn has_label(&self, label: Label) -> bool {
        self.labels.iter().any(|ls| ls.label == label.as_str())
    }

    pub fn qualified_name(&self) -> String {
        format!("{}.{}{}", self.owner, self.method, self.descriptor)
    }

    pub fn render(&self) -> String {
        serde_json::to_string(self).expect("result line serializes")
    }
}

#[derive(Debug, thiserror::Error)]
#[error("results line {line}: {message}")]
pub struct MalformedResults {
    pub line: usize,
    pub message: String,
}

pub fn parse_results(text: &str) -> Result<Vec<ResultLine>, MalformedResults> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ResultLine = serde_json::from_str(line)
            .map_err(|e| MalformedResults { line: i + 1, message: e.to_string() })?;
        for ls in &parsed.labels {
            ls.label.parse::<Label>().map_err(|_| MalformedResults {
                line: i + 1,
                message: format!("unknown label `{}`", ls.label),
            })?;
        }
        out.push(parsed);
    }
    Ok(out)
}
