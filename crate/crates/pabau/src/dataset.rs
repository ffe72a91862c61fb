//! Annotated-method ground truth: JSON Lines serialization, validation,
//! stratified splitting, and record harvesting from scanned archives.
//!
//! One record per line with keys exactly `name`, `return`,
//! `parametersTypes`, `calleeNames`, `labels`; save output is canonical
//! (fixed key order, labels sorted), so save∘load∘save is byte-identical.

use std::collections::BTreeSet;
use std::path::Path;

use pabau_core::feature::{
    build_catalog, vectorize, CalleeInfo, Catalog, FeatureSubject, TypeInfo,
};
use pabau_core::learn::TrainingMatrix;
use pabau_core::{ClassModel, Label};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawRecord {
    name: String,
    #[serde(rename = "return")]
    return_type: String,
    #[serde(rename = "parametersTypes")]
    parameter_types: Vec<String>,
    #[serde(rename = "calleeNames")]
    callee_names: Vec<String>,
    labels: Vec<String>,
}

/// One manually annotated (or harvested, labels-empty) method record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedMethod {
    /// Fully qualified `package.class.method` (≥ 2 dots).
    pub name: String,
    /// Rendered return type; `void` for none.
    pub return_type: String,
    pub parameter_types: Vec<String>,
    /// Fully qualified callee names.
    pub callee_names: Vec<String>,
    /// Sorted by label index; at most one BSC label.
    pub labels: Vec<Label>,
}

impl AnnotatedMethod {
    pub fn has_label(&self, label: Label) -> bool {
        self.labels.contains(&label)
    }

    /// Identity key for overload disambiguation.
    pub fn key(&self) -> (String, Vec<String>) {
        (self.name.clone(), self.parameter_types.clone())
    }

    /// The evaluation view shared with bytecode methods. Callee descriptors
    /// are unknown in records, so callee-type features evaluate false.
    pub fn subject(&self) -> FeatureSubject {
        let mut parts = self.name.rsplitn(3, '.');
        let method_name = parts.next().unwrap_or("").to_string();
        let class_simple_name = parts.next().unwrap_or("").to_string();
        let return_type = if self.return_type == "void" {
            None
        } else {
            Some(TypeInfo::from_rendered(&self.return_type))
        };
        FeatureSubject {
            class_simple_name,
            method_name,
            return_type,
            param_types: self.parameter_types.iter().map(|t| TypeInfo::from_rendered(t)).collect(),
            callees: self
                .callee_names
                .iter()
                .map(|n| CalleeInfo {
                    name: n.rsplit('.').next().unwrap_or(n).to_string(),
                    ..CalleeInfo::default()
                })
                .collect(),
            flow_param_to_return: false,
            flow_param_to_field: false,
            flow_field_to_return: false,
        }
    }

    fn to_raw(&self) -> RawRecord {
        RawRecord {
            name: self.name.clone(),
            return_type: self.return_type.clone(),
            parameter_types: self.parameter_types.clone(),
            callee_names: self.callee_names.clone(),
            labels: self.labels.iter().map(|l| l.as_str().to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub records: Vec<AnnotatedMethod>,
    /// Free-text source note; not serialized into the JSONL file.
    pub provenance: String,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("line {line}: schema violation: {message}")]
    SchemaViolation { line: usize, message: String },
    #[error("line {line}: duplicate record for {name} with identical parameter types")]
    DuplicateRecord { line: usize, name: String },
    #[error("line {line}: {name} carries more than one BSC label")]
    BscConflict { line: usize, name: String },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("train fraction must be strictly between 0 and 1")]
    BadFraction,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_record(line_no: usize, line: &str) -> Result<AnnotatedMethod, DatasetError> {
    let raw: RawRecord = serde_json::from_str(line)
        .map_err(|e| DatasetError::SchemaViolation { line: line_no, message: e.to_string() })?;
    if raw.name.chars().filter(|&c| c == '.').count() < 2 {
        return Err(DatasetError::SchemaViolation {
            line: line_no,
            message: format!("name `{}` is not package.class.method", raw.name),
        });
    }
    if raw.return_type.is_empty() {
        return Err(DatasetError::SchemaViolation {
            line: line_no,
            message: "empty return type (use `void`)".to_string(),
        });
    }
    let mut labels = Vec::with_capacity(raw.labels.len());
    for l in &raw.labels {
        let parsed = l.parse::<Label>().map_err(|_| DatasetError::SchemaViolation {
            line: line_no,
            message: format!("unknown label `{l}`"),
        })?;
        if labels.contains(&parsed) {
            return Err(DatasetError::SchemaViolation {
                line: line_no,
                message: format!("repeated label `{l}`"),
            });
        }
        labels.push(parsed);
    }
    labels.sort_by_key(|l| l.index());
    if labels.iter().filter(|l| l.is_bsc()).count() > 1 {
        return Err(DatasetError::BscConflict { line: line_no, name: raw.name });
    }
    Ok(AnnotatedMethod {
        name: raw.name,
        return_type: raw.return_type,
        parameter_types: raw.parameter_types,
        callee_names: raw.callee_names,
        labels,
    })
}

/// Parses and validates JSON Lines text. Returned warnings cover non-fatal
/// oddities (empty input).
pub fn parse_dataset(text: &str) -> Result<(Dataset, Vec<String>), DatasetError> {
    let mut records = Vec::new();
    let mut seen: BTreeSet<(String, Vec<String>)> = BTreeSet::new();
    let mut warnings = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_record(i + 1, line)?;
        if !seen.insert(record.key()) {
            return Err(DatasetError::DuplicateRecord { line: i + 1, name: record.name });
        }
        records.push(record);
    }
    if records.is_empty() {
        warnings.push("dataset is empty".to_string());
    }
    Ok((Dataset { records, provenance: String::new() }, warnings))
}

pub fn load_dataset(path: &Path) -> Result<(Dataset, Vec<String>), DatasetError> {
    let text = std::fs::read_to_string(path)?;
    let (mut ds, warnings) = parse_dataset(&text)?;
    ds.provenance = path.display().to_string();
    Ok((ds, warnings))
}

/// Canonical JSONL bytes: fixed key order, sorted labels, `\n` terminated.
pub fn render_dataset(dataset: &Dataset) -> String {
    let mut out = String::new();
    for r in &dataset.records {
        out.push_str(&serde_json::to_string(&r.to_raw()).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn save_dataset(dataset: &Dataset, path: &Path) -> Result<(), DatasetError> {
    std::fs::write(path, render_dataset(dataset))?;
    Ok(())
}

/// FNV-1a over the canonical serialization; recorded in trained bundles.
pub fn dataset_hash(dataset: &Dataset) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in render_dataset(dataset).bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Per-label boolean target columns, indexed by [`Label::index`].
pub fn label_targets(records: &[AnnotatedMethod]) -> Vec<Vec<bool>> {
    Label::ALL
        .iter()
        .map(|&l| records.iter().map(|r| r.has_label(l)).collect())
        .collect()
}

/// Vectorizes every record against a lexicon-derived catalog.
pub fn build_matrix(
    records: &[AnnotatedMethod],
    catalog: &Catalog,
) -> TrainingMatrix {
    let mut m = TrainingMatrix::new(catalog.catalog_id, catalog.len());
    for r in records {
        m.push(vectorize(&r.subject(), catalog)).expect("same catalog");
    }
    m
}

/// Convenience: catalog straight from a lexicon.
pub use pabau_core::lexicon::Lexicon;

pub fn catalog_for(lexicon: &Lexicon) -> Catalog {
    build_catalog(lexicon).expect("lexicon validated")
}

/// Iterative stratified split. Deterministic given the seed; records with a
/// degenerate label (< 2 positives) go to train with a warning.
pub fn stratified_split(
    dataset: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset, Vec<String>), DatasetError> {
    if dataset.records.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DatasetError::BadFraction);
    }
    let n = dataset.records.len();
    let positives: Vec<usize> = Label::ALL
        .iter()
        .map(|&l| dataset.records.iter().filter(|r| r.has_label(l)).count())
        .collect();
    let desired_train: Vec<usize> =
        positives.iter().map(|&p| (train_fraction * p as f64).round() as usize).collect();
    let desired_total = (train_fraction * n as f64).round() as usize;

    let mut warnings = Vec::new();
    for (i, &p) in positives.iter().enumerate() {
        if p == 1 {
            warnings.push(format!(
                "label {} has a single positive; it cannot be stratified and goes to train",
                Label::ALL[i]
            ));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = pabau_core::rng::SplitMix64::new(seed).derive(0x73_70_6c_69_74); // "split"
    rng.shuffle(&mut order);

    // None = unassigned; Some(true) = train.
    let mut assigned: Vec<Option<bool>> = vec![None; n];
    let mut train_pos = vec![0usize; Label::ALL.len()];
    let mut test_pos = vec![0usize; Label::ALL.len()];
    let mut remaining = positives.clone();
    let mut train_total = 0usize;

    loop {
        // Rarest label with unassigned positives first.
        let Some(l) = (0..Label::ALL.len())
            .filter(|&l| remaining[l] > 0)
            .min_by_key(|&l| (remaining[l], l))
        else {
            break;
        };
        let label = Label::ALL[l];
        let rec = *order
            .iter()
            .find(|&&i| assigned[i].is_none() && dataset.records[i].has_label(label))
            .expect("remaining count is positive");
        let to_train = if positives[l] < 2 {
            true
        } else {
            let train_need = desired_train[l].saturating_sub(train_pos[l]);
            let test_need = (positives[l] - desired_train[l]).saturating_sub(test_pos[l]);
            train_need >= test_need
        };
        assigned[rec] = Some(to_train);
        if to_train {
            train_total += 1;
        }
        for &l2 in &dataset.records[rec].labels {
            let j = l2.index();
            remaining[j] -= 1;
            if to_train {
                train_pos[j] += 1;
            } else {
                test_pos[j] += 1;
            }
        }
    }

    // Unlabeled (or fully processed) records fill up to the overall target.
    for &i in &order {
        if assigned[i].is_none() {
            let to_train = train_total < desired_total;
            assigned[i] = Some(to_train);
            if to_train {
                train_total += 1;
            }
        }
    }

    let mut train = Dataset { records: Vec::new(), provenance: dataset.provenance.clone() };
    let mut test = Dataset { records: Vec::new(), provenance: dataset.provenance.clone() };
    for (i, r) in dataset.records.iter().enumerate() {
        if assigned[i] == Some(true) {
            train.records.push(r.clone());
        } else {
            test.records.push(r.clone());
        }
    }
    Ok((train, test, warnings))
}

/// One unlabeled record per parsed method, ready for manual annotation.
pub fn harvest_records(classes: &[ClassModel]) -> Vec<AnnotatedMethod> {
    let mut out = Vec::new();
    for class in classes {
        for m in &class.methods {
            let mut callee_names: Vec<String> = Vec::new();
            for insn in &m.instructions {
                if let pabau_core::InstructionKind::Invoke { owner, name, .. } = &insn.kind {
                    let full = format!("{owner}.{name}");
                    if !callee_names.contains(&full) {
                        callee_names.push(full);
                    }
                }
            }
            out.push(AnnotatedMethod {
                name: format!("{}.{}", m.owner, m.name),
                return_type: m
                    .descriptor
                    .return_type
                    .as_ref()
                    .map_or_else(|| "void".to_string(), |t| t.render()),
                parameter_types: m.descriptor.param_types.iter().map(|t| t.render()).collect(),
                callee_names,
                labels: Vec::new(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(name: &str, labels: &[Label]) -> String {
        let labels: Vec<String> = labels.iter().map(|l| format!("\"{l}\"")).collect();
        format!(
            "{{\"name\":\"{name}\",\"return\":\"void\",\"parametersTypes\":[],\"calleeNames\":[],\"labels\":[{}]}}",
            labels.join(",")
        )
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let text = format!(
            "{}\n{}\n",
            rec("a.b.first", &[Label::Crypto, Label::Bsc3]),
            rec("a.b.second", &[])
        );
        let (ds, _) = parse_dataset(&text).unwrap();
        let once = render_dataset(&ds);
        let (ds2, _) = parse_dataset(&once).unwrap();
        assert_eq!(once, render_dataset(&ds2));
        // Labels come back sorted by label index.
        assert_eq!(ds.records[0].labels, vec![Label::Bsc3, Label::Crypto]);
    }

    #[test]
    fn bsc_conflict_rejected_with_line() {
        let text = format!("{}\n{}\n", rec("a.b.ok", &[]), rec("a.b.bad", &[Label::Bsc1, Label::Bsc2]));
        match parse_dataset(&text) {
            Err(DatasetError::BscConflict { line, name }) => {
                assert_eq!(line, 2);
                assert_eq!(name, "a.b.bad");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicates_and_schema_violations_rejected() {
        let text = format!("{}\n{}\n", rec("a.b.m", &[]), rec("a.b.m", &[]));
        assert!(matches!(parse_dataset(&text), Err(DatasetError::DuplicateRecord { line: 2, .. })));
        assert!(matches!(
            parse_dataset("{\"name\":\"toofew\"}\n"),
            Err(DatasetError::SchemaViolation { line: 1, .. })
        ));
        assert!(matches!(
            parse_dataset(&rec("nodots", &[])),
            Err(DatasetError::SchemaViolation { .. })
        ));
    }

    #[test]
    fn empty_input_warns() {
        let (ds, warnings) = parse_dataset("").unwrap();
        assert!(ds.records.is_empty());
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn split_fractions_and_determinism() {
        let lines: Vec<String> = (0..10)
            .map(|i| rec(&format!("a.b.m{i}"), &[Label::Source]))
            .collect();
        let (ds, _) = parse_dataset(&(lines.join("\n") + "\n")).unwrap();
        for seed in 0..100u64 {
            let (train, test, _) = stratified_split(&ds, 0.7, seed).unwrap();
            assert_eq!(train.records.len(), 7);
            assert_eq!(test.records.len(), 3);
            let (t2, s2, _) = stratified_split(&ds, 0.7, seed).unwrap();
            assert_eq!(render_dataset(&train), render_dataset(&t2));
            assert_eq!(render_dataset(&test), render_dataset(&s2));
        }
    }

    #[test]
    fn split_stratifies_each_label_within_one() {
        // Two disjoint labels, 10 positives each, plus unlabeled filler.
        let mut lines = Vec::new();
        for i in 0..10 {
            lines.push(rec(&format!("a.b.src{i}"), &[Label::Source]));
            lines.push(rec(&format!("a.b.snk{i}"), &[Label::Sink]));
        }
        for i in 0..10 {
            lines.push(rec(&format!("a.b.none{i}"), &[]));
        }
        let (ds, _) = parse_dataset(&(lines.join("\n") + "\n")).unwrap();
        for seed in 0..100u64 {
            let (train, _, _) = stratified_split(&ds, 0.7, seed).unwrap();
            for label in [Label::Source, Label::Sink] {
                let got = train.records.iter().filter(|r| r.has_label(label)).count();
                assert!((got as i64 - 7).abs() <= 1, "seed {seed} label {label}: {got}");
            }
        }
    }

    #[test]
    fn degenerate_label_goes_to_train_with_warning() {
        let mut lines: Vec<String> =
            (0..9).map(|i| rec(&format!("a.b.m{i}"), &[Label::Source])).collect();
        lines.push(rec("a.b.only", &[Label::Transfer]));
        let (ds, _) = parse_dataset(&(lines.join("\n") + "\n")).unwrap();
        let (train, _, warnings) = stratified_split(&ds, 0.7, 3).unwrap();
        assert!(warnings.iter().any(|w| w.contains("TRANSFER")));
        assert!(train.records.iter().any(|r| r.name == "a.b.only"));
    }

    #[test]
    fn harvest_matches_scan_counts_and_fig2_name() {
        let entries = crate::fixtures::biometric_stub_entries();
        let classes: Vec<_> =
            entries.iter().map(|(_, b)| pabau_core::parse_class(b).unwrap()).collect();
        let records = harvest_records(&classes);
        let methods: usize = classes.iter().map(|c| c.methods.len()).sum();
        assert_eq!(records.len(), methods);
        assert!(records
            .iter()
            .any(|r| r.name == "android.hardware.biometrics.BiometricPrompt.authenticate"));
        assert!(records.iter().all(|r| r.labels.is_empty()));
    }

    #[test]
    fn subject_extracts_class_and_method_names() {
        let (ds, _) = parse_dataset(&(rec("android.hardware.BiometricPrompt.authenticate", &[]) + "\n")).unwrap();
        let s = ds.records[0].subject();
        assert_eq!(s.class_simple_name, "BiometricPrompt");
        assert_eq!(s.method_name, "authenticate");
        assert!(s.return_type.is_none());
    }
}
