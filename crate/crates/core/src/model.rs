//! Structural model of Ansible YAML files.
//!
//! Classifies a file as playbook, tasks file or unknown, and provides the
//! traversal primitives the metric layer consumes: plays, task entries
//! (including those nested in block/rescue/always sections) and a generic
//! depth-first walk over every mapping pair.

use std::path::PathBuf;

use crate::knowledge::KnowledgeBase;
use crate::yaml::{load_documents, MappingEntry, YamlNode, YamlValue};
use crate::Diagnostic;

/// What kind of Ansible artifact a file is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FileKind {
    /// At least one top-level sequence item is a mapping with a `hosts`
    /// or `import_playbook` key.
    Playbook,
    /// The top level is a sequence and no item qualifies as a play.
    TasksFile,
    /// Anything else, including files that fail to parse.
    Unknown,
}

impl FileKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FileKind::Playbook => "playbook",
            FileKind::TasksFile => "tasks_file",
            FileKind::Unknown => "unknown",
        }
    }
}

impl std::fmt::Display for FileKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A source file with its parsed documents and classification.
///
/// Line metrics are always computed from `raw_text`, independent of the
/// parse result, so a malformed file still yields text-level metrics.
#[derive(Debug, Clone)]
pub struct SourceFile {
    pub path: PathBuf,
    pub raw_text: String,
    pub documents: Vec<YamlNode>,
    pub kind: FileKind,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parse a file's text into a classified [`SourceFile`].
///
/// Malformed YAML degrades gracefully: the file comes back with no
/// documents, kind [`FileKind::Unknown`] and an error diagnostic, keeping
/// raw-text metrics computable.
pub fn parse_source(path: impl Into<PathBuf>, raw_text: String) -> SourceFile {
    let path = path.into();
    match load_documents(&raw_text) {
        Ok(documents) => {
            let kind = classify(&documents);
            SourceFile { path, raw_text, documents, kind, diagnostics: Vec::new() }
        }
        Err(err) => SourceFile {
            path,
            raw_text,
            documents: Vec::new(),
            kind: FileKind::Unknown,
            diagnostics: vec![Diagnostic::error(err.line, format!("YAML parse error: {}", err.message))],
        },
    }
}

fn classify(documents: &[YamlNode]) -> FileKind {
    if documents.iter().any(document_is_playbook) {
        return FileKind::Playbook;
    }
    let mut has_sequence = false;
    for doc in documents {
        match &doc.value {
            YamlValue::Sequence(_) => has_sequence = true,
            YamlValue::Scalar(_) if doc.is_null() => {}
            _ => return FileKind::Unknown,
        }
    }
    if has_sequence {
        FileKind::TasksFile
    } else {
        FileKind::Unknown
    }
}

fn document_is_playbook(doc: &YamlNode) -> bool {
    doc.as_sequence().is_some_and(|items| {
        items.iter().any(|item| item.has_key("hosts") || item.has_key("import_playbook"))
    })
}

/// A play: a top-level mapping carrying a `hosts` key.
#[derive(Debug, Clone, Copy)]
pub struct Play<'a> {
    pub node: &'a YamlNode,
}

/// Play keys whose sequence values hold tasks.
pub const PLAY_TASK_SECTIONS: [&str; 3] = ["pre_tasks", "tasks", "post_tasks"];

impl<'a> Play<'a> {
    pub fn name(&self) -> Option<&'a str> {
        self.node.get("name")?.as_scalar()
    }

    /// The play's `vars` mapping, when present.
    pub fn vars(&self) -> Option<&'a [MappingEntry]> {
        self.node.get("vars")?.as_mapping()
    }

    /// The play's `roles` sequence, when present.
    pub fn roles(&self) -> Option<&'a [YamlNode]> {
        self.node.get("roles")?.as_sequence()
    }

    /// Task-holding sections in document order; `handlers` only on request.
    pub fn task_sections(&self, include_handlers: bool) -> Vec<&'a YamlNode> {
        let Some(entries) = self.node.as_mapping() else {
            return Vec::new();
        };
        entries
            .iter()
            .filter(|e| {
                PLAY_TASK_SECTIONS.contains(&e.key.as_str())
                    || (include_handlers && e.key == "handlers")
            })
            .map(|e| &e.value)
            .collect()
    }
}

/// All plays of the file, in document order. Task files yield none.
pub fn extract_plays(file: &SourceFile) -> Vec<Play<'_>> {
    let mut plays = Vec::new();
    for doc in &file.documents {
        if let Some(items) = doc.as_sequence() {
            for item in items {
                if item.as_mapping().is_some() && item.has_key("hosts") {
                    plays.push(Play { node: item });
                }
            }
        }
    }
    plays
}

/// A task's module invocation: the unique non-keyword key and its value.
#[derive(Debug, Clone, Copy)]
pub struct ModuleInvocation<'a> {
    pub key: &'a str,
    /// 1-based line of the module key.
    pub line: usize,
    /// Parameter node: a mapping for dict-style parameters, a scalar for
    /// free-form parameters.
    pub params: &'a YamlNode,
}

/// One entry of a task list: either a leaf task (a module invocation) or a
/// block container grouping further tasks.
#[derive(Debug, Clone)]
pub struct TaskEntry<'a> {
    pub node: &'a YamlNode,
    /// The entry's own `name` value (module parameters named `name` are not
    /// task names).
    pub name: Option<String>,
    pub module: Option<ModuleInvocation<'a>>,
    /// True iff the entry carries a `block` key; block containers hold no
    /// module and are excluded from leaf-task counts.
    pub is_block: bool,
    /// Set when a leaf task has zero or several module-key candidates.
    pub module_issue: Option<Diagnostic>,
}

/// Collect task entries under `root` in document order, descending through
/// `block`, `rescue` and `always` sections.
///
/// `root` may be a whole document (playbook or flat task list) or a single
/// play mapping. Block containers are yielded with `is_block = true`; leaf
/// counts exclude them. `include_handlers` controls whether play `handlers`
/// sections contribute entries.
pub fn iterate_tasks<'a>(
    root: &'a YamlNode,
    include_handlers: bool,
    kb: &KnowledgeBase,
) -> Vec<TaskEntry<'a>> {
    let mut out = Vec::new();
    if root.as_mapping().is_some() && root.has_key("hosts") {
        collect_play_tasks(root, include_handlers, kb, &mut out);
    } else if let Some(items) = root.as_sequence() {
        let has_play = items.iter().any(|item| item.as_mapping().is_some() && item.has_key("hosts"));
        if has_play {
            for item in items {
                if item.as_mapping().is_some() && item.has_key("hosts") {
                    collect_play_tasks(item, include_handlers, kb, &mut out);
                }
            }
        } else {
            collect_task_list(items, kb, &mut out);
        }
    }
    out
}

fn collect_play_tasks<'a>(
    play: &'a YamlNode,
    include_handlers: bool,
    kb: &KnowledgeBase,
    out: &mut Vec<TaskEntry<'a>>,
) {
    for section in (Play { node: play }).task_sections(include_handlers) {
        if let Some(items) = section.as_sequence() {
            collect_task_list(items, kb, out);
        }
    }
}

fn collect_task_list<'a>(items: &'a [YamlNode], kb: &KnowledgeBase, out: &mut Vec<TaskEntry<'a>>) {
    for item in items {
        let Some(entries) = item.as_mapping() else {
            continue;
        };
        let name = item.get("name").and_then(YamlNode::as_scalar).map(String::from);
        if item.has_key("block") {
            out.push(TaskEntry { node: item, name, module: None, is_block: true, module_issue: None });
            for section in ["block", "rescue", "always"] {
                if let Some(nested) = item.get(section).and_then(YamlNode::as_sequence) {
                    collect_task_list(nested, kb, out);
                }
            }
        } else {
            let candidates: Vec<&MappingEntry> =
                entries.iter().filter(|e| !kb.is_task_keyword(&e.key)).collect();
            let (module, module_issue) = match candidates.as_slice() {
                [single] => (
                    Some(ModuleInvocation {
                        key: &single.key,
                        line: single.key_line,
                        params: &single.value,
                    }),
                    None,
                ),
                [] => (
                    None,
                    Some(Diagnostic::warning(item.span.start, "task has no module key")),
                ),
                several => {
                    let keys: Vec<&str> = several.iter().map(|e| e.key.as_str()).collect();
                    (
                        None,
                        Some(Diagnostic::warning(
                            item.span.start,
                            format!("ambiguous module key (candidates: {})", keys.join(", ")),
                        )),
                    )
                }
            };
            out.push(TaskEntry { node: item, name, module, is_block: false, module_issue });
        }
    }
}

/// Depth-first, document-order stream of every mapping pair at every depth.
///
/// The pair is emitted before its value's own pairs; `depth` counts
/// enclosing containers from the root node.
pub fn walk_mappings(root: &YamlNode) -> MappingWalk<'_> {
    MappingWalk { stack: vec![Work::Node(root, 0)] }
}

enum Work<'a> {
    Node(&'a YamlNode, usize),
    Pair(&'a MappingEntry, usize),
}

/// Iterator returned by [`walk_mappings`].
pub struct MappingWalk<'a> {
    stack: Vec<Work<'a>>,
}

impl<'a> Iterator for MappingWalk<'a> {
    type Item = (&'a str, &'a YamlNode, usize);

    fn next(&mut self) -> Option<Self::Item> {
        while let Some(work) = self.stack.pop() {
            match work {
                Work::Node(node, depth) => match &node.value {
                    YamlValue::Scalar(_) => {}
                    YamlValue::Sequence(items) => {
                        for item in items.iter().rev() {
                            self.stack.push(Work::Node(item, depth + 1));
                        }
                    }
                    YamlValue::Mapping(entries) => {
                        for entry in entries.iter().rev() {
                            self.stack.push(Work::Pair(entry, depth));
                        }
                    }
                },
                Work::Pair(entry, depth) => {
                    self.stack.push(Work::Node(&entry.value, depth + 1));
                    return Some((&entry.key, &entry.value, depth));
                }
            }
        }
        None
    }
}
