//! The key-occurrence rule engine: a uniform counter behind every
//! "occurrences of key X" metric, parameterized by where a key must stand.

use crate::knowledge::KnowledgeBase;
use crate::metrics::catalogue::Metric;
use crate::metrics::AnalysisOptions;
use crate::model::{walk_mappings, SourceFile};
use crate::yaml::YamlNode;

/// Where a key must occur to be counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyPosition {
    /// Anywhere in the document tree.
    AnyKey,
    /// Only as the module key of a leaf task.
    ModuleKey,
    /// Only as a direct key of a task-level mapping: a task entry, a block
    /// container, a play, or a top-level playbook entry (such as an
    /// `import_playbook` item).
    TaskLevelKey,
}

/// Binding of one metric to a key set and a position.
#[derive(Debug, Clone, Copy)]
pub struct KeyCountRule {
    pub metric: Metric,
    pub keys: &'static [&'static str],
    /// Prefix rules, e.g. `with_` for the loop metric.
    pub prefixes: &'static [&'static str],
    pub position: KeyPosition,
}

impl KeyCountRule {
    fn matches(&self, key: &str) -> bool {
        self.keys.contains(&key) || self.prefixes.iter().any(|p| key.starts_with(p))
    }

    /// Module keys may be collection-qualified; match the final segment too.
    fn matches_module(&self, key: &str) -> bool {
        self.matches(key) || self.matches(key.rsplit('.').next().unwrap_or(key))
    }
}

/// Every key-occurrence metric with its binding. Metrics not listed here
/// (lines, expressions, modules, names, structure, averages) have dedicated
/// computations.
pub const KEY_COUNT_RULES: &[KeyCountRule] = &[
    KeyCountRule {
        metric: Metric::NumCommands,
        keys: &["command", "expect", "psexec", "raw", "script", "shell", "telnet"],
        prefixes: &[],
        position: KeyPosition::ModuleKey,
    },
    KeyCountRule { metric: Metric::NumFile, keys: &["file"], prefixes: &[], position: KeyPosition::ModuleKey },
    KeyCountRule {
        metric: Metric::NumSSH,
        keys: &["ssh_authorized_key", "authorized_key"],
        prefixes: &[],
        position: KeyPosition::ModuleKey,
    },
    KeyCountRule { metric: Metric::NumFileMode, keys: &["mode"], prefixes: &[], position: KeyPosition::AnyKey },
    KeyCountRule {
        metric: Metric::NumPaths,
        keys: &["paths", "src", "dest"],
        prefixes: &[],
        position: KeyPosition::AnyKey,
    },
    KeyCountRule { metric: Metric::NumRegex, keys: &["regexp"], prefixes: &[], position: KeyPosition::AnyKey },
    KeyCountRule { metric: Metric::NumURLs, keys: &["url"], prefixes: &[], position: KeyPosition::AnyKey },
    KeyCountRule {
        metric: Metric::NumUserInteractions,
        keys: &["prompt"],
        prefixes: &[],
        position: KeyPosition::AnyKey,
    },
    KeyCountRule {
        metric: Metric::NumLoops,
        keys: &["loop"],
        prefixes: &["with_"],
        position: KeyPosition::TaskLevelKey,
    },
    KeyCountRule {
        metric: Metric::NumIgnoreErrors,
        keys: &["ignore_errors"],
        prefixes: &[],
        position: KeyPosition::TaskLevelKey,
    },
    KeyCountRule { metric: Metric::NumInclude, keys: &["include"], prefixes: &[], position: KeyPosition::TaskLevelKey },
    KeyCountRule {
        metric: Metric::NumIncludeRole,
        keys: &["include_role"],
        prefixes: &[],
        position: KeyPosition::TaskLevelKey,
    },
    KeyCountRule {
        metric: Metric::NumIncludeTasks,
        keys: &["include_tasks"],
        prefixes: &[],
        position: KeyPosition::TaskLevelKey,
    },
    KeyCountRule {
        metric: Metric::NumIncludeVars,
        keys: &["include_vars"],
        prefixes: &[],
        position: KeyPosition::TaskLevelKey,
    },
    KeyCountRule {
        metric: Metric::NumImportPlaybook,
        keys: &["import_playbook"],
        prefixes: &[],
        position: KeyPosition::TaskLevelKey,
    },
    KeyCountRule {
        metric: Metric::NumImportRole,
        keys: &["import_role"],
        prefixes: &[],
        position: KeyPosition::TaskLevelKey,
    },
    KeyCountRule {
        metric: Metric::NumImportTasks,
        keys: &["import_tasks"],
        prefixes: &[],
        position: KeyPosition::TaskLevelKey,
    },
    KeyCountRule { metric: Metric::NumBlocks, keys: &["block"], prefixes: &[], position: KeyPosition::TaskLevelKey },
];

/// Count mapping keys matching `rule` at the rule's position across every
/// document of `file`. Unparsed files count 0 everywhere.
pub fn count_key_occurrences(
    file: &SourceFile,
    rule: &KeyCountRule,
    kb: &KnowledgeBase,
    options: &AnalysisOptions,
) -> usize {
    match rule.position {
        KeyPosition::AnyKey => file
            .documents
            .iter()
            .flat_map(walk_mappings)
            .filter(|(key, _, _)| rule.matches(key))
            .count(),
        KeyPosition::ModuleKey => super::file_task_entries(file, kb, options)
            .iter()
            .filter_map(|t| t.module.as_ref())
            .filter(|m| rule.matches_module(m.key))
            .count(),
        KeyPosition::TaskLevelKey => task_level_mappings(file, kb, options)
            .iter()
            .flat_map(|node| node.as_mapping().unwrap_or(&[]))
            .filter(|entry| rule.matches(&entry.key))
            .count(),
    }
}

/// Every mapping whose direct keys stand at task level: plays and top-level
/// playbook entries, plus every task entry (leaf or block container).
pub(super) fn task_level_mappings<'a>(
    file: &'a SourceFile,
    kb: &KnowledgeBase,
    options: &AnalysisOptions,
) -> Vec<&'a YamlNode> {
    let mut nodes: Vec<&YamlNode> = Vec::new();
    for doc in &file.documents {
        if let Some(items) = doc.as_sequence() {
            let has_play = items.iter().any(|item| item.as_mapping().is_some() && item.has_key("hosts"));
            if has_play {
                // Plays and sibling playbook-level entries; their tasks are
                // appended below through the task iteration.
                nodes.extend(items.iter().filter(|item| item.as_mapping().is_some()));
            }
        }
    }
    let entries = super::file_task_entries(file, kb, options);
    nodes.extend(entries.iter().map(|t| t.node));
    nodes
}
