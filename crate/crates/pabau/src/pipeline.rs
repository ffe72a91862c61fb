//! Streaming classification pipeline: scan → flows → vectorize → classify.
//!
//! Classes flow through a bounded queue to worker threads; a single writer
//! reorders per-class results back into (archive-entry, method) order, so the
//! output is byte-identical for any `--jobs` setting.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::mpsc::{sync_channel, Receiver, SyncSender};
use std::sync::Mutex;
use std::time::Instant;

use pabau_core::feature::{vectorize, Catalog, FeatureSubject};
use pabau_core::flow::analyze_flows;
use pabau_core::learn::{classify, LabelModelBundle, MethodIdentity};
use pabau_core::{ClassModel, Label};

use crate::archive::{scan_archive_with, ArchiveError, ScanSummary};
use crate::results::ResultLine;
use crate::runstats::{peak_rss_mb, RunStats};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-class unit of work already detached from the scan.
struct ClassResult {
    seq: usize,
    lines: Vec<String>,
    methods: usize,
    labeled: usize,
    per_label: [usize; 16],
}

fn process_class(seq: usize, class: &ClassModel, bundle: &LabelModelBundle, catalog: &Catalog, all: bool) -> ClassResult {
    let mut result = ClassResult {
        seq,
        lines: Vec::new(),
        methods: class.methods.len(),
        labeled: 0,
        per_label: [0; 16],
    };
    for method in &class.methods {
        let flows = analyze_flows(method);
        let subject = FeatureSubject::from_method(method, &flows);
        let vector = vectorize(&subject, catalog);
        let identity = MethodIdentity {
            owner: method.owner.clone(),
            name: method.name.clone(),
            descriptor: method.descriptor.render(),
        };
        let assignment = classify(bundle, identity, &vector).expect("catalog checked at load");
        let line = ResultLine::from_assignment(&assignment);
        let has_labels = !line.labels.is_empty();
        if has_labels {
            result.labeled += 1;
            for ls in &line.labels {
                let label: Label = ls.label.parse().expect("labels come from Label");
                result.per_label[label.index()] += 1;
            }
        }
        if has_labels || all {
            result.lines.push(line.render());
        }
    }
    result
}

/// Classifies every method in the archive, writing result lines to `out`.
pub fn classify_archive(
    path: &Path,
    bundle: &LabelModelBundle,
    catalog: &Catalog,
    jobs: usize,
    all: bool,
    out: &mut dyn Write,
) -> Result<(RunStats, ScanSummary, Vec<String>), PipelineError> {
    assert_eq!(bundle.catalog_id, catalog.catalog_id, "bundle/catalog skew");
    let started = Instant::now();
    let mut stats = RunStats::default();

    let mut absorb = |r: ClassResult, out: &mut dyn Write| -> std::io::Result<()> {
        stats.total_methods += r.methods;
        stats.biometric_methods += r.labeled;
        for i in 0..16 {
            stats.per_label_counts[i] += r.per_label[i];
        }
        for line in &r.lines {
            out.write_all(line.as_bytes())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    };

    let (summary, warnings) = if jobs <= 1 {
        let mut io_err: Option<std::io::Error> = None;
        let mut seq = 0usize;
        let scan = scan_archive_with(path, &mut |class| {
            if io_err.is_some() {
                return;
            }
            let r = process_class(seq, &class, bundle, catalog, all);
            seq += 1;
            if let Err(e) = absorb(r, out) {
                io_err = Some(e);
            }
        })?;
        if let Some(e) = io_err {
            return Err(e.into());
        }
        scan
    } else {
        // Bounded fan-out / strictly ordered fan-in.
        let (work_tx, work_rx): (SyncSender<(usize, ClassModel)>, Receiver<(usize, ClassModel)>) =
            sync_channel(jobs * 4);
        let work_rx = Mutex::new(work_rx);
        let (done_tx, done_rx) = sync_channel::<ClassResult>(jobs * 4);

        std::thread::scope(|scope| -> Result<(ScanSummary, Vec<String>), PipelineError> {
            for _ in 0..jobs {
                let work_rx = &work_rx;
                let done_tx = done_tx.clone();
                scope.spawn(move || {
                    loop {
                        let item = work_rx.lock().expect("queue lock").recv();
                        let Ok((seq, class)) = item else { break };
                        let r = process_class(seq, &class, bundle, catalog, all);
                        if done_tx.send(r).is_err() {
                            break;
                        }
                    }
                });
            }
            drop(done_tx);

            let writer = scope.spawn(move || -> std::io::Result<Vec<ClassResult>> {
                // Reorder by sequence number; deliver contiguously.
                let mut pending: BTreeMap<usize, ClassResult> = BTreeMap::new();
                let mut next = 0usize;
                let mut ordered = Vec::new();
                while let Ok(r) = done_rx.recv() {
                    pending.insert(r.seq, r);
                    while let Some(r) = pending.remove(&next) {
                        ordered.push(r);
                        next += 1;
                    }
                }
                while let Some(r) = pending.remove(&next) {
                    ordered.push(r);
                    next += 1;
                }
                Ok(ordered)
            });

            let mut seq = 0usize;
            let scan = scan_archive_with(path, &mut |class| {
                work_tx.send((seq, class)).expect("workers alive");
                seq += 1;
            })?;
            drop(work_tx);
            let ordered = writer.join().expect("writer thread")?;
            for r in ordered {
                absorb(r, out)?;
            }
            Ok(scan)
        })?
    };

    stats.wall_time_s = started.elapsed().as_secs_f64();
    stats.peak_memory_mb = peak_rss_mb();
    Ok((stats, summary, warnings))
}
