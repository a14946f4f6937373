//! Versioned vocabularies for the module-aware metrics.
//!
//! A knowledge base carries five name lists: community modules, fact
//! modules, deprecated modules, deprecated keywords and task-level keywords.
//! A built-in snapshot ships with the crate; users can override it with a
//! file in the documented format (it implements [`std::str::FromStr`]).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::LazyLock;

/// Classification of a module key against a knowledge base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModuleClass {
    Community,
    Fact,
    Deprecated,
    External,
}

/// Errors raised while loading a knowledge file.
#[derive(Debug, thiserror::Error)]
pub enum KnowledgeError {
    #[error("knowledge file line {0}: {1}")]
    MalformedKnowledgeFile(usize, String),
    #[error("knowledge file is missing section [{0}]")]
    MissingSection(String),
    #[error("cannot read knowledge file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A set of names with optional `*`-suffixed prefix entries (e.g. `with_*`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct NameSet {
    exact: BTreeSet<String>,
    prefixes: BTreeSet<String>,
}

impl NameSet {
    fn insert(&mut self, entry: &str) {
        match entry.strip_suffix('*') {
            Some(prefix) => {
                self.prefixes.insert(prefix.to_string());
            }
            None => {
                self.exact.insert(entry.to_string());
            }
        }
    }

    fn contains(&self, name: &str) -> bool {
        self.exact.contains(name) || self.prefixes.iter().any(|p| name.starts_with(p.as_str()))
    }

    fn merge(&mut self, other: &NameSet) {
        self.exact.extend(other.exact.iter().cloned());
        self.prefixes.extend(other.prefixes.iter().cloned());
    }

    fn entries(&self) -> impl Iterator<Item = String> + '_ {
        self.exact
            .iter()
            .cloned()
            .chain(self.prefixes.iter().map(|p| format!("{p}*")))
    }
}

const SECTION_NAMES: [&str; 5] = [
    "community_modules",
    "fact_modules",
    "deprecated_modules",
    "deprecated_keywords",
    "task_keywords",
];

/// The pinned vocabularies required by classification-dependent metrics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBase {
    version_label: String,
    community_modules: NameSet,
    fact_modules: NameSet,
    deprecated_modules: NameSet,
    deprecated_keywords: NameSet,
    task_keywords: NameSet,
}

static BUILTIN: LazyLock<KnowledgeBase> = LazyLock::new(|| {
    KnowledgeBase::from_str(include_str!("knowledge_default.txt"))
        .expect("built-in knowledge data is well-formed")
});

impl KnowledgeBase {
    /// The snapshot bundled with the crate.
    pub fn builtin() -> &'static KnowledgeBase {
        &BUILTIN
    }

    pub fn version_label(&self) -> &str {
        &self.version_label
    }

    /// Load a knowledge file from disk.
    pub fn load_path(path: &Path) -> Result<KnowledgeBase, KnowledgeError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| KnowledgeError::Io { path: path.to_path_buf(), source })?;
        text.parse()
    }
}

/// Parse the knowledge file format:
///
/// ```text
/// version=<label>        (required first line)
/// [community_modules]    (five fixed sections, any order, all required)
/// yum
/// ...
/// [task_keywords]
/// with_*                 (trailing * marks a prefix rule)
/// ```
///
/// `#` starts a comment; blank lines are ignored; unknown sections are
/// rejected. Fact modules are merged into the community list after
/// loading, so `fact_modules` is always a subset of `community_modules`.
impl std::str::FromStr for KnowledgeBase {
    type Err = KnowledgeError;

    fn from_str(text: &str) -> Result<KnowledgeBase, KnowledgeError> {
        use KnowledgeError::MalformedKnowledgeFile as Malformed;

        let mut lines = text.lines().enumerate();
        let version_label = match lines.next() {
            Some((_, first)) => match strip_comment(first).trim().strip_prefix("version=") {
                Some(label) if !label.trim().is_empty() => label.trim().to_string(),
                _ => {
                    return Err(Malformed(1, "expected 'version=<label>' on the first line".into()));
                }
            },
            None => return Err(Malformed(1, "empty knowledge file".into())),
        };

        let mut kb = KnowledgeBase {
            version_label,
            community_modules: NameSet::default(),
            fact_modules: NameSet::default(),
            deprecated_modules: NameSet::default(),
            deprecated_keywords: NameSet::default(),
            task_keywords: NameSet::default(),
        };
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut current: Option<&str> = None;

        for (idx, raw) in lines {
            let line_no = idx + 1;
            let line = strip_comment(raw).trim().to_string();
            if line.is_empty() {
                continue;
            }
            if let Some(inner) = line.strip_prefix('[') {
                let Some(name) = inner.strip_suffix(']') else {
                    return Err(Malformed(line_no, format!("unterminated section header '{line}'")));
                };
                let Some(&known) = SECTION_NAMES.iter().find(|s| **s == name) else {
                    return Err(Malformed(line_no, format!("unknown section [{name}]")));
                };
                seen.insert(known);
                current = Some(known);
                continue;
            }
            let valid = line.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-' | '*'))
                && line.find('*').is_none_or(|pos| pos == line.len() - 1);
            if !valid {
                return Err(Malformed(line_no, format!("invalid entry '{line}'")));
            }
            let Some(section) = current else {
                return Err(Malformed(line_no, format!("entry '{line}' before any section header")));
            };
            kb.section_mut(section).insert(&line);
        }

        for name in SECTION_NAMES {
            if !seen.contains(name) {
                return Err(KnowledgeError::MissingSection(name.to_string()));
            }
        }

        let facts = kb.fact_modules.clone();
        kb.community_modules.merge(&facts);
        Ok(kb)
    }
}

impl KnowledgeBase {
    /// Canonical text form: version line, fixed section order, sorted
    /// entries. Loading the output yields an equal knowledge base.
    pub fn serialize(&self) -> String {
        let mut out = format!("version={}\n", self.version_label);
        for name in SECTION_NAMES {
            out.push_str(&format!("[{name}]\n"));
            for entry in self.section(name).entries() {
                out.push_str(&entry);
                out.push('\n');
            }
        }
        out
    }

    fn section(&self, name: &str) -> &NameSet {
        match name {
            "community_modules" => &self.community_modules,
            "fact_modules" => &self.fact_modules,
            "deprecated_modules" => &self.deprecated_modules,
            "deprecated_keywords" => &self.deprecated_keywords,
            "task_keywords" => &self.task_keywords,
            _ => unreachable!("unknown section {name}"),
        }
    }

    fn section_mut(&mut self, name: &str) -> &mut NameSet {
        match name {
            "community_modules" => &mut self.community_modules,
            "fact_modules" => &mut self.fact_modules,
            "deprecated_modules" => &mut self.deprecated_modules,
            "deprecated_keywords" => &mut self.deprecated_keywords,
            "task_keywords" => &mut self.task_keywords,
            _ => unreachable!("unknown section {name}"),
        }
    }

    /// Classify a module key with fixed precedence
    /// Deprecated > Fact > Community > External. Collection-qualified names
    /// (`namespace.collection.module`) are compared on both the full name
    /// and the final segment.
    pub fn classify_module(&self, name: &str) -> ModuleClass {
        let last = name.rsplit('.').next().unwrap_or(name);
        let hit = |set: &NameSet| set.contains(name) || set.contains(last);
        if hit(&self.deprecated_modules) {
            ModuleClass::Deprecated
        } else if hit(&self.fact_modules) {
            ModuleClass::Fact
        } else if hit(&self.community_modules) {
            ModuleClass::Community
        } else {
            ModuleClass::External
        }
    }

    /// True iff `key` is a task-level keyword (exact match or prefix rule
    /// such as `with_*`), i.e. not a candidate module key.
    pub fn is_task_keyword(&self, key: &str) -> bool {
        self.task_keywords.contains(key)
    }

    pub fn is_deprecated_keyword(&self, key: &str) -> bool {
        self.deprecated_keywords.contains(key)
    }
}

fn strip_comment(line: &str) -> &str {
    let mut prev_is_space = true;
    for (i, c) in line.char_indices() {
        if c == '#' && prev_is_space {
            return &line[..i];
        }
        prev_is_space = c.is_whitespace();
    }
    line
}

/// Load a knowledge base from `path`, or the built-in snapshot when `None`.
pub fn load_knowledge_base(path: Option<&Path>) -> Result<KnowledgeBase, KnowledgeError> {
    match path {
        Some(p) => KnowledgeBase::load_path(p),
        None => Ok(KnowledgeBase::builtin().clone()),
    }
}
