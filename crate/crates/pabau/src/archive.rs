//! Archive scanning: JAR/zip archives, single class files, and directory
//! trees, delivered in deterministic lexicographic entry order.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use pabau_core::classfile::SourceRef;
use pabau_core::{parse_class, ClassModel};
use zip::ZipArchive;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScanSummary {
    pub classes: usize,
    pub methods: usize,
    pub failures: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ArchiveError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not a readable zip archive: {source}")]
    BadZip {
        path: String,
        #[source]
        source: zip::result::ZipError,
    },
    #[error("{path}: unsupported input (expected .jar/.zip, .class, or a directory)")]
    UnsupportedInput { path: String },
}

/// Streams every parsed class to `sink`. Per-entry parse failures become
/// warnings and are skipped; only unreadable inputs abort.
pub fn scan_archive_with(
    path: &Path,
    sink: &mut dyn FnMut(ClassModel),
) -> Result<(ScanSummary, Vec<String>), ArchiveError> {
    let mut summary = ScanSummary::default();
    let mut warnings = Vec::new();
    let display = path.display().to_string();

    fn consume(
        entry_name: &str,
        bytes: &[u8],
        archive: &str,
        summary: &mut ScanSummary,
        warnings: &mut Vec<String>,
        sink: &mut dyn FnMut(ClassModel),
    ) {
        match parse_class(bytes) {
            Ok(mut model) => {
                model.source_archive =
                    SourceRef { archive: archive.to_string(), entry: entry_name.to_string() };
                summary.classes += 1;
                summary.methods += model.methods.len();
                sink(model);
            }
            Err(e) => {
                summary.failures += 1;
                warnings.push(format!("{archive}!{entry_name}: {e}"));
            }
        }
    }

    if path.is_dir() {
        let mut files: Vec<_> = walkdir::WalkDir::new(path)
            .into_iter()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_type().is_file())
            .map(|e| e.into_path())
            .collect();
        files.sort();
        for file in files {
            let rel = file.strip_prefix(path).unwrap_or(&file).display().to_string();
            if rel.ends_with(".class") {
                let bytes = std::fs::read(&file)
                    .map_err(|source| ArchiveError::Unreadable { path: rel.clone(), source })?;
                consume(&rel, &bytes, &display, &mut summary, &mut warnings, sink);
            }
        }
        return Ok((summary, warnings));
    }

    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    match ext.as_str() {
        "class" => {
            let bytes = std::fs::read(path)
                .map_err(|source| ArchiveError::Unreadable { path: display.clone(), source })?;
            let entry = path.file_name().and_then(|n| n.to_str()).unwrap_or("?").to_string();
            consume(&entry, &bytes, &display, &mut summary, &mut warnings, sink);
            Ok((summary, warnings))
        }
        "jar" | "zip" => {
            let file = File::open(path)
                .map_err(|source| ArchiveError::Unreadable { path: display.clone(), source })?;
            let mut zip = ZipArchive::new(file)
                .map_err(|source| ArchiveError::BadZip { path: display.clone(), source })?;
            let mut names: Vec<String> = zip.file_names().map(String::from).collect();
            names.sort();
            let mut buf = Vec::new();
            for name in names {
                if name.ends_with(".jar") {
                    warnings.push(format!("{display}!{name}: nested JAR skipped"));
                    continue;
                }
                if !name.ends_with(".class") {
                    continue;
                }
                let mut entry = match zip.by_name(&name) {
                    Ok(e) => e,
                    Err(e) => {
                        summary.failures += 1;
                        warnings.push(format!("{display}!{name}: {e}"));
                        continue;
                    }
                };
                buf.clear();
                if let Err(e) = entry.read_to_end(&mut buf) {
                    summary.failures += 1;
                    warnings.push(format!("{display}!{name}: {e}"));
                    continue;
                }
                consume(&name, &buf, &display, &mut summary, &mut warnings, sink);
            }
            Ok((summary, warnings))
        }
        _ => Err(ArchiveError::UnsupportedInput { path: display }),
    }
}

/// Collecting convenience over [`scan_archive_with`].
pub fn scan_archive(
    path: &Path,
) -> Result<(Vec<ClassModel>, ScanSummary, Vec<String>), ArchiveError> {
    let mut classes = Vec::new();
    let (summary, warnings) = scan_archive_with(path, &mut |c| classes.push(c))?;
    Ok((classes, summary, warnings))
}
