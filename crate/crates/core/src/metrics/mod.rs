//! Metric computation: every catalogue metric for one source file.
//!
//! Dedicated computations cover lines, expressions, modules, names,
//! structure and averages; the remaining "occurrences of key X" metrics run
//! through the [`rules`] engine. [`compute_all`] assembles the full report,
//! applies scope rules and attaches diagnostics.

mod catalogue;
mod rules;

pub use catalogue::{Metric, Scope, ValueKind};
pub use rules::{count_key_occurrences, KeyCountRule, KeyPosition, KEY_COUNT_RULES};

use std::collections::{BTreeSet, HashMap};
use std::sync::LazyLock;

use regex::Regex;

use crate::knowledge::{KnowledgeBase, ModuleClass};
use crate::lexing::{
    classify_lines, extract_template_expressions, lex_expression, scan_lines, text_entropy,
    tokenize_text, LineClass, TokenKind,
};
use crate::model::{extract_plays, iterate_tasks, walk_mappings, SourceFile, TaskEntry};
use crate::yaml::{YamlNode, YamlValue};
use crate::Diagnostic;

/// Which flavor of the existence-check regex to apply for the ensure metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnsureRegexMode {
    /// `\w+\.stat\.\w+ is defined` (dots match literal dots).
    #[default]
    Escaped,
    /// `\w+.stat.\w+ is defined` (dots match any character).
    Literal,
}

/// Knobs for the analysis; defaults reproduce the documented behavior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub ensure_regex: EnsureRegexMode,
    /// Whether play `handlers` sections contribute task entries.
    pub include_handlers: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { ensure_regex: EnsureRegexMode::Escaped, include_handlers: true }
    }
}

/// A computed metric value: integer count or real (entropy, averages).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricValue {
    Count(u64),
    Real(f64),
}

impl MetricValue {
    pub fn as_count(self) -> Option<u64> {
        match self {
            MetricValue::Count(n) => Some(n),
            MetricValue::Real(_) => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            MetricValue::Count(n) => n as f64,
            MetricValue::Real(x) => x,
        }
    }

    /// Canonical text form used by both the JSON and CSV emitters: counts
    /// print as integers, reals with exactly six decimal places.
    pub fn render(self) -> String {
        match self {
            MetricValue::Count(n) => n.to_string(),
            MetricValue::Real(x) => format!("{x:.6}"),
        }
    }
}

/// The 46 catalogue metrics for one file, in catalogue order, with per-scope
/// applicability flags and analysis diagnostics.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub path: String,
    pub kind: crate::model::FileKind,
    values: Vec<MetricValue>,
    applicable: Vec<bool>,
    pub diagnostics: Vec<Diagnostic>,
}

impl MetricsReport {
    pub fn value(&self, metric: Metric) -> MetricValue {
        self.values[metric.index()]
    }

    pub fn applicable(&self, metric: Metric) -> bool {
        self.applicable[metric.index()]
    }

    /// Every metric with its value and applicability, in catalogue order.
    pub fn entries(&self) -> impl Iterator<Item = (Metric, MetricValue, bool)> + '_ {
        Metric::ALL.iter().map(|m| (*m, self.value(*m), self.applicable(*m)))
    }
}

/// Raw-text metrics; available even for unparseable files.
#[derive(Debug, Clone, PartialEq)]
pub struct LineMetrics {
    pub lines_blank: usize,
    pub lines_comment: usize,
    pub lines_source: usize,
    pub num_tokens: usize,
    pub text_entropy: f64,
    pub num_suspicious_comments: usize,
}

static SUSPICIOUS_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b(TODO|FIXME|HACK|XXX|CHECKME|DOCME|TESTME|PENDING)\b").expect("valid regex")
});

/// Line classes, token count, token entropy and suspicious comments.
/// Suspicious markers match case-sensitively as whole words; each comment
/// counts at most once.
pub fn compute_line_metrics(file: &SourceFile) -> LineMetrics {
    let stats = scan_lines(&file.raw_text);
    let tokens = tokenize_text(&file.raw_text);
    LineMetrics {
        lines_blank: stats.blank_lines,
        lines_comment: stats.comment_lines,
        lines_source: stats.source_lines,
        num_tokens: tokens.len(),
        text_entropy: text_entropy(&tokens),
        num_suspicious_comments: stats
            .comments
            .iter()
            .filter(|(_, text)| SUSPICIOUS_RE.is_match(text))
            .count(),
    }
}

/// Metrics lexed out of `when` clauses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConditionMetrics {
    pub num_conditions: usize,
    pub num_decisions: usize,
    pub num_ensure: usize,
}

static ENSURE_ESCAPED_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\w+\.stat\.\w+ is defined").expect("valid regex"));
static ENSURE_LITERAL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\w+.stat.\w+ is defined").expect("valid regex"));

/// Comparison and boolean operator counts plus existence-check matches over
/// every `when` value in the file. List-valued `when` clauses are lexed per
/// element (the implicit conjunction between elements is not counted).
pub fn compute_condition_metrics(file: &SourceFile, options: &AnalysisOptions) -> ConditionMetrics {
    let ensure_re: &Regex = match options.ensure_regex {
        EnsureRegexMode::Escaped => &ENSURE_ESCAPED_RE,
        EnsureRegexMode::Literal => &ENSURE_LITERAL_RE,
    };
    let mut metrics = ConditionMetrics { num_conditions: 0, num_decisions: 0, num_ensure: 0 };
    for clause in collect_when_strings(file) {
        for token in lex_expression(&elide_templates(&clause)) {
            match token.kind {
                TokenKind::ComparisonOp => metrics.num_conditions += 1,
                TokenKind::BooleanOp => metrics.num_decisions += 1,
                _ => {}
            }
        }
        metrics.num_ensure += ensure_re.find_iter(&clause).count();
    }
    metrics
}

/// Metrics lexed out of `{{ ... }}` template expressions (and, for lookups
/// and math operators, `when` clauses as well).
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionMetrics {
    pub num_filters: usize,
    pub num_lookups: usize,
    pub num_math_operations: usize,
    pub diagnostics: Vec<Diagnostic>,
}

/// Filter pipes count only inside extracted expressions; lookups and math
/// operators count in expressions and `when` clauses. Template regions
/// inside `when` text are elided there because the raw-text extraction
/// already covers them.
pub fn compute_expression_metrics(file: &SourceFile, _options: &AnalysisOptions) -> ExpressionMetrics {
    let (expressions, diagnostics) = extract_template_expressions(&file.raw_text);
    let mut metrics = ExpressionMetrics {
        num_filters: 0,
        num_lookups: 0,
        num_math_operations: 0,
        diagnostics,
    };
    for expression in &expressions {
        for token in lex_expression(&expression.text) {
            match token.kind {
                TokenKind::FilterPipe => metrics.num_filters += 1,
                TokenKind::LookupCall => metrics.num_lookups += 1,
                TokenKind::MathOp => metrics.num_math_operations += 1,
                _ => {}
            }
        }
    }
    for clause in collect_when_strings(file) {
        for token in lex_expression(&elide_templates(&clause)) {
            match token.kind {
                TokenKind::LookupCall => metrics.num_lookups += 1,
                TokenKind::MathOp => metrics.num_math_operations += 1,
                _ => {}
            }
        }
    }
    metrics
}

/// Module-classification metrics and parameter/keyword counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModuleMetrics {
    pub num_distinct_modules: usize,
    pub num_external_modules: usize,
    pub num_fact_modules: usize,
    pub num_deprecated_modules: usize,
    pub num_parameters: usize,
    pub num_deprecated_keywords: usize,
}

/// Distinct community/fact module names (deduplicated on the final segment
/// of qualified names), per-class occurrence counts, parameter-key totals
/// and deprecated-keyword occurrences. Ambiguous tasks contribute nothing.
pub fn compute_module_metrics(
    file: &SourceFile,
    kb: &KnowledgeBase,
    options: &AnalysisOptions,
) -> ModuleMetrics {
    let mut distinct: BTreeSet<String> = BTreeSet::new();
    let mut metrics = ModuleMetrics {
        num_distinct_modules: 0,
        num_external_modules: 0,
        num_fact_modules: 0,
        num_deprecated_modules: 0,
        num_parameters: 0,
        num_deprecated_keywords: 0,
    };
    for task in file_task_entries(file, kb, options) {
        let Some(module) = &task.module else { continue };
        let canonical = module.key.rsplit('.').next().unwrap_or(module.key);
        match kb.classify_module(module.key) {
            ModuleClass::Community => {
                distinct.insert(canonical.to_string());
            }
            ModuleClass::Fact => {
                metrics.num_fact_modules += 1;
                distinct.insert(canonical.to_string());
            }
            ModuleClass::Deprecated => metrics.num_deprecated_modules += 1,
            ModuleClass::External => metrics.num_external_modules += 1,
        }
        metrics.num_parameters += module.params.as_mapping().map_or(0, <[_]>::len);
    }
    metrics.num_distinct_modules = distinct.len();
    metrics.num_deprecated_keywords = file
        .documents
        .iter()
        .flat_map(walk_mappings)
        .filter(|(key, _, _)| kb.is_deprecated_keyword(key))
        .count();
    metrics
}

/// Name-based metrics over play/block/task-level `name` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NameMetrics {
    pub num_unique_names: usize,
    pub num_name_with_variables: usize,
}

static NAME_VAR_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\{\{\w+\}\}").expect("valid regex"));

/// Unique-name and templated-name counts. Only `name` keys of plays, blocks
/// and task entries participate; module parameters named `name` never do.
pub fn compute_name_metrics(
    file: &SourceFile,
    kb: &KnowledgeBase,
    options: &AnalysisOptions,
) -> NameMetrics {
    let names: Vec<String> = rules::task_level_mappings(file, kb, options)
        .iter()
        .filter_map(|node| node.get("name").and_then(YamlNode::as_scalar).map(String::from))
        .collect();
    let mut occurrences: HashMap<&str, usize> = HashMap::new();
    for name in &names {
        *occurrences.entry(name).or_insert(0) += 1;
    }
    NameMetrics {
        num_unique_names: occurrences.values().filter(|&&n| n == 1).count(),
        num_name_with_variables: names
            .iter()
            .filter(|name| NAME_VAR_RE.is_match(&strip_brace_interior_spaces(name)))
            .count(),
    }
}

/// Structural totals over plays, tasks and the raw document tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureMetrics {
    pub num_plays: usize,
    pub num_roles: usize,
    pub num_tasks: usize,
    pub num_variables: usize,
    pub num_keys: usize,
    pub num_blocks_error_handling: usize,
}

pub fn compute_structure_metrics(
    file: &SourceFile,
    kb: &KnowledgeBase,
    options: &AnalysisOptions,
) -> StructureMetrics {
    let plays = extract_plays(file);
    let entries = file_task_entries(file, kb, options);
    StructureMetrics {
        num_plays: plays.len(),
        num_roles: plays.iter().map(|p| p.roles().map_or(0, <[_]>::len)).sum(),
        num_tasks: entries.iter().filter(|t| !t.is_block).count(),
        num_variables: plays.iter().map(|p| p.vars().map_or(0, <[_]>::len)).sum(),
        num_keys: file.documents.iter().flat_map(walk_mappings).count(),
        num_blocks_error_handling: entries
            .iter()
            .filter(|t| t.is_block && (t.node.has_key("rescue") || t.node.has_key("always")))
            .count(),
    }
}

/// Size averages, rounded half-up to the nearest unit; 0 on a zero
/// denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Averages {
    pub avg_play_size: f64,
    pub avg_task_size: f64,
}

pub fn compute_averages(file: &SourceFile, kb: &KnowledgeBase, options: &AnalysisOptions) -> Averages {
    let classes = classify_lines(&file.raw_text);
    let source_total = classes.iter().filter(|c| **c == LineClass::Source).count();

    let num_plays = extract_plays(file).len();
    let avg_play_size = if num_plays == 0 {
        0.0
    } else {
        // Round half-up; both operands are non-negative, so f64::round
        // (half away from zero) implements it.
        (source_total as f64 / num_plays as f64).round()
    };

    let entries = file_task_entries(file, kb, options);
    let leaf_count = entries.iter().filter(|t| !t.is_block).count();
    let avg_task_size = if leaf_count == 0 {
        0.0
    } else {
        // Union of the source lines covered by leaf-task spans, so
        // overlapping spans never double-count.
        let mut covered = vec![false; classes.len()];
        for task in entries.iter().filter(|t| !t.is_block) {
            for line in task.node.span.start..=task.node.span.end {
                if let Some(slot) = covered.get_mut(line - 1) {
                    *slot = classes[line - 1] == LineClass::Source;
                }
            }
        }
        let task_source_lines = covered.iter().filter(|c| **c).count();
        (task_source_lines as f64 / leaf_count as f64).round()
    };

    Averages { avg_play_size, avg_task_size }
}

/// Compute the full 46-metric report for one file.
///
/// Every catalogue metric is present in catalogue order; metrics outside the
/// file kind's scope are reported with value 0 and `applicable = false`.
/// Deterministic: identical input text and knowledge base yield an
/// identical report.
pub fn compute_all(file: &SourceFile, kb: &KnowledgeBase, options: &AnalysisOptions) -> MetricsReport {
    let mut builder = ReportBuilder::new();

    let line = compute_line_metrics(file);
    builder.count(Metric::LinesBlank, line.lines_blank);
    builder.count(Metric::LinesComment, line.lines_comment);
    builder.count(Metric::LinesSourceCode, line.lines_source);
    builder.count(Metric::NumTokens, line.num_tokens);
    builder.real(Metric::TextEntropy, line.text_entropy);
    builder.count(Metric::NumSuspiciousComments, line.num_suspicious_comments);

    let condition = compute_condition_metrics(file, options);
    builder.count(Metric::NumConditions, condition.num_conditions);
    builder.count(Metric::NumDecisions, condition.num_decisions);
    builder.count(Metric::NumEnsure, condition.num_ensure);

    let expression = compute_expression_metrics(file, options);
    builder.count(Metric::NumFilters, expression.num_filters);
    builder.count(Metric::NumLookups, expression.num_lookups);
    builder.count(Metric::NumMathOperations, expression.num_math_operations);

    for rule in KEY_COUNT_RULES {
        builder.count(rule.metric, count_key_occurrences(file, rule, kb, options));
    }

    let module = compute_module_metrics(file, kb, options);
    builder.count(Metric::NumDistinctModules, module.num_distinct_modules);
    builder.count(Metric::NumExternalModules, module.num_external_modules);
    builder.count(Metric::NumFactModules, module.num_fact_modules);
    builder.count(Metric::NumDeprecatedModules, module.num_deprecated_modules);
    builder.count(Metric::NumParameters, module.num_parameters);
    builder.count(Metric::NumDeprecatedKeywords, module.num_deprecated_keywords);

    let name = compute_name_metrics(file, kb, options);
    builder.count(Metric::NumUniqueNames, name.num_unique_names);
    builder.count(Metric::NumNameWithVariables, name.num_name_with_variables);

    let structure = compute_structure_metrics(file, kb, options);
    builder.count(Metric::NumPlays, structure.num_plays);
    builder.count(Metric::NumRoles, structure.num_roles);
    builder.count(Metric::NumTasks, structure.num_tasks);
    builder.count(Metric::NumVariables, structure.num_variables);
    builder.count(Metric::NumKeys, structure.num_keys);
    builder.count(Metric::NumBlocksErrorHandling, structure.num_blocks_error_handling);

    let averages = compute_averages(file, kb, options);
    builder.real(Metric::AvgPlaySize, averages.avg_play_size);
    builder.real(Metric::AvgTaskSize, averages.avg_task_size);

    let mut values = builder.finish();
    let mut applicable = Vec::with_capacity(Metric::ALL.len());
    for metric in Metric::ALL {
        let is_applicable = metric.applicable_to(file.kind);
        applicable.push(is_applicable);
        if !is_applicable {
            values[metric.index()] = zero_value(metric);
        }
    }

    let mut diagnostics = file.diagnostics.clone();
    diagnostics.extend(expression.diagnostics);
    for task in file_task_entries(file, kb, options) {
        if let Some(issue) = task.module_issue {
            diagnostics.push(issue);
        }
    }

    MetricsReport {
        path: file.path.display().to_string(),
        kind: file.kind,
        values,
        applicable,
        diagnostics,
    }
}

fn zero_value(metric: Metric) -> MetricValue {
    match metric.value_kind() {
        ValueKind::Count => MetricValue::Count(0),
        ValueKind::Real => MetricValue::Real(0.0),
    }
}

struct ReportBuilder {
    values: Vec<Option<MetricValue>>,
}

impl ReportBuilder {
    fn new() -> Self {
        ReportBuilder { values: vec![None; Metric::ALL.len()] }
    }

    fn count(&mut self, metric: Metric, value: usize) {
        self.values[metric.index()] = Some(MetricValue::Count(value as u64));
    }

    fn real(&mut self, metric: Metric, value: f64) {
        self.values[metric.index()] = Some(MetricValue::Real(value));
    }

    fn finish(self) -> Vec<MetricValue> {
        self.values
            .into_iter()
            .zip(Metric::ALL)
            .map(|(value, metric)| {
                value.unwrap_or_else(|| {
                    panic!("metric {} was not computed: registry and catalogue disagree", metric.name())
                })
            })
            .collect()
    }
}

pub(crate) fn file_task_entries<'a>(
    file: &'a SourceFile,
    kb: &KnowledgeBase,
    options: &AnalysisOptions,
) -> Vec<TaskEntry<'a>> {
    file.documents
        .iter()
        .flat_map(|doc| iterate_tasks(doc, options.include_handlers, kb))
        .collect()
}

fn collect_when_strings(file: &SourceFile) -> Vec<String> {
    let mut out = Vec::new();
    for doc in &file.documents {
        for (key, value, _) in walk_mappings(doc) {
            if key == "when" {
                push_when_texts(value, &mut out);
            }
        }
    }
    out
}

fn push_when_texts(node: &YamlNode, out: &mut Vec<String>) {
    match &node.value {
        YamlValue::Scalar(text) => {
            if !text.is_empty() {
                out.push(text.clone());
            }
        }
        YamlValue::Sequence(items) => {
            for item in items {
                push_when_texts(item, out);
            }
        }
        YamlValue::Mapping(_) => {}
    }
}

/// Blank out `{{ ... }}` regions so template interiors are not lexed twice
/// (the raw-text expression extraction already covers them).
fn elide_templates(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '{' && i + 1 < chars.len() && chars[i + 1] == '{' {
            let mut j = i + 2;
            let mut closed = false;
            while j < chars.len() {
                if chars[j] == '}' && j + 1 < chars.len() && chars[j + 1] == '}' {
                    closed = true;
                    break;
                }
                j += 1;
            }
            out.push(' ');
            i = if closed { j + 2 } else { chars.len() };
        } else {
            out.push(chars[i]);
            i += 1;
        }
    }
    out
}

fn strip_brace_interior_spaces(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '{' && i + 1 < chars.len() && chars[i + 1] == '{' {
            out.push_str("{{");
            i += 2;
            while i < chars.len() && !(chars[i] == '}' && i + 1 < chars.len() && chars[i + 1] == '}') {
                if !chars[i].is_whitespace() {
                    out.push(chars[i]);
                }
                i += 1;
            }
        } else {
            out.push(chars[i]);
            i += 1;
        }
    }
    out
}
