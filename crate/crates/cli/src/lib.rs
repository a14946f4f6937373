//! File scanning and report emission for the `iac-metrics` binary.
//!
//! [`scan`] walks the requested roots, analyzes every matching YAML file in
//! parallel and returns one [`MetricsReport`] per file in a deterministic
//! order. [`emit_json`] and [`emit_csv`] render a summary; both use the same
//! value formatting, so the two outputs always agree.

use std::collections::BTreeSet;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use walkdir::WalkDir;

use iac_metrics::{
    compute_all, load_knowledge_base, parse_source, AnalysisOptions, Diagnostic, FileKind,
    KnowledgeError, Metric, MetricsReport, Severity,
};

/// What to scan and how.
#[derive(Debug, Clone)]
pub struct ScanConfig {
    /// Files and directories to analyze. File roots are always analyzed;
    /// directory walks only pick up files matching `extensions`.
    pub roots: Vec<PathBuf>,
    /// Lowercase extensions (without the dot) accepted during walks.
    pub extensions: BTreeSet<String>,
    /// Knowledge file overriding the built-in one.
    pub kb_path: Option<PathBuf>,
    /// Report a failing exit status when any file cannot be parsed. The scan
    /// itself always completes; this only affects the caller's exit code.
    pub strict: bool,
    /// Worker threads; `None` uses one per CPU.
    pub parallelism: Option<NonZeroUsize>,
    pub analysis: AnalysisOptions,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            roots: Vec::new(),
            extensions: ["yml", "yaml"].into_iter().map(String::from).collect(),
            kb_path: None,
            strict: false,
            parallelism: None,
            analysis: AnalysisOptions::default(),
        }
    }
}

/// Errors that abort a scan before any file is analyzed.
#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("path does not exist: {0}")]
    RootNotFound(PathBuf),
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
    #[error("cannot build worker pool: {0}")]
    ThreadPool(String),
}

/// Everything a scan produced, ready for emission.
#[derive(Debug, Clone)]
pub struct ScanSummary {
    pub tool_version: String,
    pub kb_version: String,
    pub files_total: usize,
    pub files_parsed: usize,
    pub files_failed: usize,
    /// One report per file, ordered by path.
    pub reports: Vec<MetricsReport>,
    /// Walk-level problems (unreadable directories, broken links).
    pub walk_diagnostics: Vec<String>,
}

/// A report counts as failed when analysis hit an error-severity problem
/// (unreadable file, bad encoding or YAML parse error); its raw-text metrics
/// are still meaningful.
pub fn report_failed(report: &MetricsReport) -> bool {
    report.diagnostics.iter().any(|d| d.severity == Severity::Error)
}

/// Walk the configured roots and compute metrics for every file.
///
/// Files are analyzed in parallel but reported in sorted path order, so the
/// output is byte-identical regardless of thread count.
pub fn scan(config: &ScanConfig) -> Result<ScanSummary, ScanError> {
    let kb = load_knowledge_base(config.kb_path.as_deref())?;

    let mut walk_diagnostics = Vec::new();
    let mut files: Vec<PathBuf> = Vec::new();
    for root in &config.roots {
        if !root.exists() {
            return Err(ScanError::RootNotFound(root.clone()));
        }
        if root.is_file() {
            files.push(root.clone());
            continue;
        }
        for entry in WalkDir::new(root).follow_links(true) {
            match entry {
                Ok(entry) => {
                    if entry.file_type().is_file() && matches_extension(entry.path(), &config.extensions) {
                        files.push(entry.into_path());
                    }
                }
                Err(err) => walk_diagnostics.push(format!("walk error: {err}")),
            }
        }
    }
    files.sort();
    files.dedup();

    let analyze = |path: &PathBuf| analyze_path(path, &kb, &config.analysis);
    let reports: Vec<MetricsReport> = match config.parallelism {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads.get())
            .build()
            .map_err(|err| ScanError::ThreadPool(err.to_string()))?
            .install(|| files.par_iter().map(analyze).collect()),
        None => files.par_iter().map(analyze).collect(),
    };

    let files_failed = reports.iter().filter(|r| report_failed(r)).count();
    Ok(ScanSummary {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        kb_version: kb.version_label().to_string(),
        files_total: reports.len(),
        files_parsed: reports.len() - files_failed,
        files_failed,
        reports,
        walk_diagnostics,
    })
}

fn matches_extension(path: &Path, extensions: &BTreeSet<String>) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| extensions.contains(&e.to_ascii_lowercase()))
}

fn analyze_path(path: &Path, kb: &iac_metrics::KnowledgeBase, options: &AnalysisOptions) -> MetricsReport {
    match std::fs::read(path) {
        Err(err) => {
            let mut file = parse_source(path, String::new());
            file.diagnostics.push(Diagnostic::error(1, format!("cannot read file: {err}")));
            compute_all(&file, kb, options)
        }
        Ok(bytes) => match String::from_utf8(bytes) {
            Ok(text) => compute_all(&parse_source(path, text), kb, options),
            Err(err) => {
                // Bad encoding: analyze the lossy text for raw-text metrics
                // but drop the document tree and mark the file failed.
                let text = String::from_utf8_lossy(err.as_bytes()).into_owned();
                let mut file = parse_source(path, text);
                file.documents.clear();
                file.kind = FileKind::Unknown;
                file.diagnostics
                    .insert(0, Diagnostic::error(1, "file is not valid UTF-8".to_string()));
                compute_all(&file, kb, options)
            }
        },
    }
}

fn json_string(text: &str) -> String {
    serde_json::to_string(text).expect("strings always serialize")
}

/// Render the summary as pretty-printed JSON.
///
/// Metrics appear as a name-to-value object in catalogue order; counts are
/// integers and reals carry six decimal places, matching the CSV output.
pub fn emit_json(summary: &ScanSummary) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"tool_version\": {},\n", json_string(&summary.tool_version)));
    out.push_str(&format!("  \"kb_version\": {},\n", json_string(&summary.kb_version)));
    out.push_str(&format!("  \"files_total\": {},\n", summary.files_total));
    out.push_str(&format!("  \"files_parsed\": {},\n", summary.files_parsed));
    out.push_str(&format!("  \"files_failed\": {},\n", summary.files_failed));
    if summary.reports.is_empty() {
        out.push_str("  \"files\": []\n");
    } else {
        out.push_str("  \"files\": [\n");
        let last_report = summary.reports.len() - 1;
        for (index, report) in summary.reports.iter().enumerate() {
            out.push_str("    {\n");
            out.push_str(&format!("      \"path\": {},\n", json_string(&report.path)));
            out.push_str(&format!("      \"kind\": {},\n", json_string(report.kind.as_str())));
            out.push_str(&format!("      \"failed\": {},\n", report_failed(report)));

            out.push_str("      \"metrics\": {\n");
            let last_metric = Metric::ALL.len() - 1;
            for (position, (metric, value, _)) in report.entries().enumerate() {
                let comma = if position == last_metric { "" } else { "," };
                out.push_str(&format!("        \"{}\": {}{}\n", metric.name(), value.render(), comma));
            }
            out.push_str("      },\n");

            out.push_str("      \"applicable\": {\n");
            for (position, (metric, _, applicable)) in report.entries().enumerate() {
                let comma = if position == last_metric { "" } else { "," };
                out.push_str(&format!("        \"{}\": {}{}\n", metric.name(), applicable, comma));
            }
            out.push_str("      },\n");

            if report.diagnostics.is_empty() {
                out.push_str("      \"diagnostics\": []\n");
            } else {
                out.push_str("      \"diagnostics\": [\n");
                let last_diag = report.diagnostics.len() - 1;
                for (position, diag) in report.diagnostics.iter().enumerate() {
                    let comma = if position == last_diag { "" } else { "," };
                    out.push_str(&format!(
                        "        {{\"severity\": {}, \"line\": {}, \"message\": {}}}{}\n",
                        json_string(diag.severity.as_str()),
                        diag.line,
                        json_string(&diag.message),
                        comma
                    ));
                }
                out.push_str("      ]\n");
            }

            let comma = if index == last_report { "" } else { "," };
            out.push_str(&format!("    }}{}\n", comma));
        }
        out.push_str("  ]\n");
    }
    out.push('}');
    out.push('\n');
    out
}

/// Render the summary as CSV: `file,kind` followed by the 46 metric columns
/// in catalogue order. With `include_non_applicable` set, out-of-scope
/// metrics print their zero values; otherwise those cells stay empty.
pub fn emit_csv(summary: &ScanSummary, include_non_applicable: bool) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["file".to_string(), "kind".to_string()];
    header.extend(Metric::ALL.iter().map(|m| m.name().to_string()));
    writer.write_record(&header).expect("writing to memory cannot fail");

    for report in &summary.reports {
        let mut record = vec![report.path.clone(), report.kind.as_str().to_string()];
        for (_, value, applicable) in report.entries() {
            if applicable || include_non_applicable {
                record.push(value.render());
            } else {
                record.push(String::new());
            }
        }
        writer.write_record(&record).expect("writing to memory cannot fail");
    }

    let bytes = writer.into_inner().expect("flushing a memory writer cannot fail");
    String::from_utf8(bytes).expect("CSV output is UTF-8")
}

/// One line per metric: name, scope and description. Shown by `--help`.
pub fn metric_reference() -> String {
    let mut out = String::from("Metric reference (46 metrics, report order):\n");
    for metric in Metric::ALL {
        out.push_str(&format!(
            "  {:<24} [{}] {}\n",
            metric.name(),
            metric.scope().as_str(),
            metric.description()
        ));
    }
    out
}
