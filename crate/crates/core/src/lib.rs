//! Static-analysis metrics for Ansible YAML artifacts.
//!
//! The crate parses playbooks and task files into a line-span-aware document
//! tree, classifies each file, and computes a fixed catalogue of 46 quality
//! metrics per file. The catalogue covers raw-text measures (lines, tokens,
//! entropy), key-occurrence counts (modules, loops, includes), expression
//! measures (conditions, decisions, filters, lookups, math operators), and
//! structural measures (plays, tasks, blocks, names, averages).
//!
//! Typical use:
//!
//! ```
//! use iac_metrics::{compute_all, parse_source, AnalysisOptions, KnowledgeBase, Metric};
//!
//! let text = "- hosts: web\n  tasks:\n  - name: ping it\n    ping:\n";
//! let file = parse_source("site.yml", text.to_string());
//! let report = compute_all(&file, KnowledgeBase::builtin(), &AnalysisOptions::default());
//! assert_eq!(report.value(Metric::NumTasks).as_count(), Some(1));
//! ```

pub mod knowledge;
pub mod lexing;
pub mod metrics;
pub mod model;
pub mod yaml;

pub use knowledge::{load_knowledge_base, KnowledgeBase, KnowledgeError, ModuleClass};
pub use lexing::{
    extract_template_expressions, lex_expression, scan_lines, text_entropy, tokenize_text,
    ExpressionToken, LineStats, TemplateExpression, TokenKind,
};
pub use metrics::{
    compute_all, AnalysisOptions, EnsureRegexMode, KeyCountRule, KeyPosition, Metric, MetricValue,
    MetricsReport, Scope,
};
pub use model::{extract_plays, iterate_tasks, parse_source, walk_mappings, FileKind, Play, SourceFile, TaskEntry};
pub use yaml::{load_documents, MappingEntry, ParseError, Span, YamlNode, YamlValue};

/// How bad a recorded analysis event is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Severity {
    /// The file could not be fully analyzed (parse failure, bad encoding).
    Error,
    /// Analysis continued but something looked off (ambiguous module,
    /// unterminated template expression).
    Warning,
}

impl Severity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

impl std::fmt::Display for Severity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A per-file analysis event attached to the metrics report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// 1-based source line the event refers to (0 when no line applies).
    pub line: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn error(line: usize, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, line, message: message.into() }
    }

    pub fn warning(line: usize, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, line, message: message.into() }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: line {}: {}", self.severity, self.line, self.message)
    }
}
