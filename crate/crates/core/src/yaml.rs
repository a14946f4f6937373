//! YAML loading with line spans.
//!
//! Builds an owned document tree from a streaming YAML parser. Every node
//! records the 1-based inclusive line range it covers, which the metric
//! layer uses for task-size measurements and diagnostics. Anchors and
//! aliases are resolved eagerly and merge keys (`<<`) are expanded, so
//! consumers see the structure Ansible would actually execute.

use std::collections::HashMap;

use yaml_rust2::parser::{Event, MarkedEventReceiver, Parser};
use yaml_rust2::scanner::{Marker, TScalarStyle};

/// Key used when a mapping key is itself a sequence or mapping.
pub const NON_SCALAR_KEY: &str = "<non-scalar-key>";

/// 1-based inclusive line range covered by a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn point(line: usize) -> Self {
        Span { start: line, end: line }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn line_count(&self) -> usize {
        self.end - self.start + 1
    }
}

/// One `key: value` pair of a mapping, keeping the source line of the key.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingEntry {
    pub key: String,
    pub key_line: usize,
    pub value: YamlNode,
}

/// Node payload: block and flow collections are not distinguished.
#[derive(Debug, Clone, PartialEq)]
pub enum YamlValue {
    /// All scalars are kept as their string form; `~` and empty scalars
    /// represent null.
    Scalar(String),
    Sequence(Vec<YamlNode>),
    Mapping(Vec<MappingEntry>),
}

/// A parsed YAML node plus the source lines it occupies.
#[derive(Debug, Clone, PartialEq)]
pub struct YamlNode {
    pub value: YamlValue,
    pub span: Span,
}

impl YamlNode {
    pub fn scalar(text: impl Into<String>, span: Span) -> Self {
        YamlNode { value: YamlValue::Scalar(text.into()), span }
    }

    pub fn as_scalar(&self) -> Option<&str> {
        match &self.value {
            YamlValue::Scalar(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_sequence(&self) -> Option<&[YamlNode]> {
        match &self.value {
            YamlValue::Sequence(items) => Some(items),
            _ => None,
        }
    }

    pub fn as_mapping(&self) -> Option<&[MappingEntry]> {
        match &self.value {
            YamlValue::Mapping(entries) => Some(entries),
            _ => None,
        }
    }

    /// First value stored under `key`, if this node is a mapping.
    pub fn get(&self, key: &str) -> Option<&YamlNode> {
        self.get_entry(key).map(|e| &e.value)
    }

    pub fn get_entry(&self, key: &str) -> Option<&MappingEntry> {
        self.as_mapping()?.iter().find(|e| e.key == key)
    }

    pub fn has_key(&self, key: &str) -> bool {
        self.get_entry(key).is_some()
    }

    /// True for `~`, `null` and empty scalars.
    pub fn is_null(&self) -> bool {
        matches!(self.as_scalar(), Some("" | "~" | "null" | "Null" | "NULL"))
    }
}

/// YAML syntax error; the whole file falls back to raw-text metrics.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

enum Frame {
    Sequence { items: Vec<YamlNode>, start: usize, anchor: usize },
    Mapping { entries: Vec<MappingEntry>, pending_key: Option<(String, usize)>, start: usize, anchor: usize },
}

#[derive(Default)]
struct TreeBuilder {
    documents: Vec<YamlNode>,
    stack: Vec<Frame>,
    anchors: HashMap<usize, YamlNode>,
    root: Option<YamlNode>,
}

impl TreeBuilder {
    /// Attach a finished node to the enclosing frame (or as document root).
    /// `empty_plain` marks a zero-length plain scalar, whose marker points at
    /// the next token rather than at the empty value itself.
    fn complete(&mut self, node: YamlNode, empty_plain: bool) {
        match self.stack.last_mut() {
            None => self.root = Some(node),
            Some(Frame::Sequence { items, .. }) => items.push(node),
            Some(Frame::Mapping { entries, pending_key, .. }) => match pending_key.take() {
                None => {
                    let key = match &node.value {
                        YamlValue::Scalar(s) => s.clone(),
                        _ => NON_SCALAR_KEY.to_string(),
                    };
                    *pending_key = Some((key, node.span.start));
                }
                Some((key, key_line)) => {
                    let mut value = node;
                    if empty_plain && value.span.start > key_line {
                        value.span = Span::point(key_line);
                    }
                    entries.push(MappingEntry { key, key_line, value });
                }
            },
        }
    }
}

impl MarkedEventReceiver for TreeBuilder {
    fn on_event(&mut self, ev: Event, mark: Marker) {
        match ev {
            Event::Nothing | Event::StreamStart | Event::StreamEnd | Event::DocumentStart => {}
            Event::DocumentEnd => {
                if let Some(root) = self.root.take() {
                    self.documents.push(root);
                }
            }
            Event::Scalar(text, style, anchor, _tag) => {
                let start = mark.line();
                // Block scalars keep interior newlines; the marker sits on
                // the first content line, so trailing newlines are ignored.
                let inner_newlines = text.trim_end_matches('\n').matches('\n').count();
                let node = YamlNode::scalar(text.clone(), Span { start, end: start + inner_newlines });
                if anchor > 0 {
                    self.anchors.insert(anchor, node.clone());
                }
                let empty_plain = style == TScalarStyle::Plain && text.is_empty();
                self.complete(node, empty_plain);
            }
            Event::SequenceStart(anchor, _tag) => {
                self.stack.push(Frame::Sequence { items: Vec::new(), start: mark.line(), anchor });
            }
            Event::SequenceEnd => {
                if let Some(Frame::Sequence { items, start, anchor }) = self.stack.pop() {
                    // End-event markers point past the collection, so the
                    // end line is derived from the children instead.
                    let start = items.first().map_or(start, |n| start.min(n.span.start));
                    let end = items.iter().map(|n| n.span.end).max().unwrap_or(start).max(start);
                    let node = YamlNode { value: YamlValue::Sequence(items), span: Span { start, end } };
                    if anchor > 0 {
                        self.anchors.insert(anchor, node.clone());
                    }
                    self.complete(node, false);
                }
            }
            Event::MappingStart(anchor, _tag) => {
                self.stack.push(Frame::Mapping {
                    entries: Vec::new(),
                    pending_key: None,
                    start: mark.line(),
                    anchor,
                });
            }
            Event::MappingEnd => {
                if let Some(Frame::Mapping { entries, start, anchor, .. }) = self.stack.pop() {
                    let entries = expand_merge_keys(entries);
                    let start = entries
                        .iter()
                        .map(|e| e.key_line.min(e.value.span.start))
                        .min()
                        .map_or(start, |first| start.min(first));
                    let end = entries
                        .iter()
                        .map(|e| e.key_line.max(e.value.span.end))
                        .max()
                        .unwrap_or(start)
                        .max(start);
                    let node = YamlNode { value: YamlValue::Mapping(entries), span: Span { start, end } };
                    if anchor > 0 {
                        self.anchors.insert(anchor, node.clone());
                    }
                    self.complete(node, false);
                }
            }
            Event::Alias(anchor) => {
                let line = mark.line();
                let mut node = self
                    .anchors
                    .get(&anchor)
                    .cloned()
                    .unwrap_or_else(|| YamlNode::scalar("", Span::point(line)));
                // The aliased content occupies no extra source lines here.
                respan(&mut node, line);
                self.complete(node, false);
            }
        }
    }
}

/// Expand `<<` merge entries: explicit keys win, earlier merge sources win,
/// and merged-in entries are re-spanned to the merge key's line.
fn expand_merge_keys(entries: Vec<MappingEntry>) -> Vec<MappingEntry> {
    if !entries.iter().any(|e| e.key == "<<") {
        return entries;
    }
    let explicit: std::collections::HashSet<&str> =
        entries.iter().filter(|e| e.key != "<<").map(|e| e.key.as_str()).collect();
    let mut merged_in: std::collections::HashSet<String> = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(entries.len());
    for entry in &entries {
        if entry.key != "<<" {
            out.push(entry.clone());
            continue;
        }
        for source in merge_sources(&entry.value) {
            for inherited in source {
                if explicit.contains(inherited.key.as_str()) || !merged_in.insert(inherited.key.clone()) {
                    continue;
                }
                let mut value = inherited.value.clone();
                respan(&mut value, entry.key_line);
                out.push(MappingEntry { key: inherited.key.clone(), key_line: entry.key_line, value });
            }
        }
    }
    out
}

fn merge_sources(value: &YamlNode) -> Vec<&[MappingEntry]> {
    match &value.value {
        YamlValue::Mapping(entries) => vec![entries.as_slice()],
        YamlValue::Sequence(items) => items
            .iter()
            .filter_map(|n| match &n.value {
                YamlValue::Mapping(entries) => Some(entries.as_slice()),
                _ => None,
            })
            .collect(),
        YamlValue::Scalar(_) => Vec::new(),
    }
}

/// Collapse a subtree onto a single line (alias sites, merged-in entries).
fn respan(node: &mut YamlNode, line: usize) {
    node.span = Span::point(line);
    match &mut node.value {
        YamlValue::Scalar(_) => {}
        YamlValue::Sequence(items) => {
            for item in items {
                respan(item, line);
            }
        }
        YamlValue::Mapping(entries) => {
            for entry in entries {
                entry.key_line = line;
                respan(&mut entry.value, line);
            }
        }
    }
}

/// Clamp a document's spans to the file's line range and force child spans
/// inside their parents. Marker corner cases (empty scalars at end of file,
/// folded scalars) can otherwise stick out by a line.
fn normalize(node: &mut YamlNode, total_lines: usize) {
    let total = total_lines.max(1);
    node.span.start = node.span.start.clamp(1, total);
    node.span.end = node.span.end.clamp(node.span.start, total);
    clamp_children(node);
}

fn clamp_children(node: &mut YamlNode) {
    let span = node.span;
    match &mut node.value {
        YamlValue::Scalar(_) => {}
        YamlValue::Sequence(items) => {
            for item in items {
                force_within(item, span);
            }
        }
        YamlValue::Mapping(entries) => {
            for entry in entries {
                entry.key_line = entry.key_line.clamp(span.start, span.end);
                force_within(&mut entry.value, span);
            }
        }
    }
}

fn force_within(node: &mut YamlNode, parent: Span) {
    node.span.start = node.span.start.clamp(parent.start, parent.end);
    node.span.end = node.span.end.clamp(node.span.start, parent.end);
    clamp_children(node);
}

/// Parse every document of a YAML stream into span-carrying trees.
///
/// Returns an error when the stream is syntactically malformed; callers keep
/// the raw text and degrade to text-only metrics.
pub fn load_documents(text: &str) -> Result<Vec<YamlNode>, ParseError> {
    let mut parser = Parser::new_from_str(text);
    let mut builder = TreeBuilder::default();
    match parser.load(&mut builder, true) {
        Ok(()) => {
            let total_lines = text.lines().count();
            let mut documents = builder.documents;
            for doc in &mut documents {
                normalize(doc, total_lines);
            }
            Ok(documents)
        }
        Err(err) => Err(ParseError { line: err.marker().line(), message: err.info().to_string() }),
    }
}
