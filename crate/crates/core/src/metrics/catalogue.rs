//! The fixed metric catalogue: names, scopes, value kinds and one-line
//! definitions, in the canonical report order.

use crate::model::FileKind;

/// Applicability scope of a metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scope {
    /// Computed for every file.
    General,
    /// Meaningful for playbooks only.
    Playbook,
    /// Meaningful for playbooks and tasks files.
    PlaybookOrTasks,
}

impl Scope {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scope::General => "general",
            Scope::Playbook => "playbook",
            Scope::PlaybookOrTasks => "playbook|tasks",
        }
    }
}

/// Whether a metric is an integer count or a real number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Count,
    Real,
}

macro_rules! catalogue {
    ($(($variant:ident, $scope:ident, $kind:ident, $desc:literal)),+ $(,)?) => {
        /// One of the 46 catalogue metrics, in canonical report order.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        #[repr(usize)]
        pub enum Metric {
            $($variant),+
        }

        impl Metric {
            /// Every metric, in report order.
            pub const ALL: [Metric; 46] = [$(Metric::$variant),+];

            /// The metric's report name.
            pub fn name(self) -> &'static str {
                match self {
                    $(Metric::$variant => stringify!($variant)),+
                }
            }

            pub fn scope(self) -> Scope {
                match self {
                    $(Metric::$variant => Scope::$scope),+
                }
            }

            pub fn value_kind(self) -> ValueKind {
                match self {
                    $(Metric::$variant => ValueKind::$kind),+
                }
            }

            /// One-line definition shown in the CLI metric reference.
            pub fn description(self) -> &'static str {
                match self {
                    $(Metric::$variant => $desc),+
                }
            }
        }
    };
}

catalogue![
    (LinesBlank, General, Count, "Blank lines (whitespace only)."),
    (LinesComment, General, Count, "Lines whose first non-blank character is '#'."),
    (LinesSourceCode, General, Count, "Physical lines that are neither blank nor comments."),
    (NumCommands, General, Count, "Tasks invoking command-like modules (command, expect, psexec, raw, script, shell, telnet)."),
    (NumConditions, General, Count, "Comparison operators (is, in, ==, !=, >, >=, <, <=) in when clauses."),
    (NumDecisions, General, Count, "Boolean operators (and, or, not) in when clauses."),
    (NumDeprecatedKeywords, General, Count, "Keys anywhere matching the deprecated-keyword list."),
    (NumEnsure, General, Count, "when clauses matching the existence-check pattern '\\w+\\.stat\\.\\w+ is defined'."),
    (NumFile, General, Count, "Tasks invoking the file module."),
    (NumFileMode, General, Count, "Occurrences of the mode key, anywhere."),
    (NumLoops, General, Count, "Task-level loop and with_* keys."),
    (NumMathOperations, General, Count, "Math operators (+, -, /, //, %, *, **) in template expressions and when clauses."),
    (NumParameters, General, Count, "Total keys across module parameter mappings."),
    (NumPaths, General, Count, "Occurrences of the paths, src and dest keys, anywhere."),
    (NumRegex, General, Count, "Occurrences of the regexp key, anywhere."),
    (NumSSH, General, Count, "Tasks invoking SSH key modules (ssh_authorized_key, authorized_key)."),
    (NumSuspiciousComments, General, Count, "Comments containing TODO, FIXME, HACK, XXX, CHECKME, DOCME, TESTME or PENDING."),
    (NumURLs, General, Count, "Occurrences of the url key, anywhere."),
    (NumTokens, General, Count, "Whitespace-separated words in the whole file."),
    (NumUserInteractions, General, Count, "Occurrences of the prompt key, anywhere."),
    (NumVariables, General, Count, "Total keys across the vars mappings of plays."),
    (TextEntropy, General, Real, "Shannon entropy (bits) of the file's whitespace-separated words."),
    (NumPlays, Playbook, Count, "Plays: top-level items carrying a hosts key."),
    (NumRoles, Playbook, Count, "Total entries in the roles sections of plays."),
    (AvgPlaySize, PlaybookOrTasks, Real, "Source lines divided by the number of plays, rounded to the nearest unit."),
    (AvgTaskSize, PlaybookOrTasks, Real, "Source lines covered by leaf tasks divided by the number of tasks, rounded to the nearest unit."),
    (NumBlocks, PlaybookOrTasks, Count, "Task-level block keys."),
    (NumBlocksErrorHandling, PlaybookOrTasks, Count, "Blocks having a rescue or always section."),
    (NumDeprecatedModules, PlaybookOrTasks, Count, "Tasks invoking modules from the deprecated-module list."),
    (NumDistinctModules, PlaybookOrTasks, Count, "Distinct community-maintained module names invoked."),
    (NumExternalModules, PlaybookOrTasks, Count, "Tasks invoking modules not in the community list."),
    (NumFactModules, PlaybookOrTasks, Count, "Tasks invoking fact-gathering modules."),
    (NumFilters, PlaybookOrTasks, Count, "Pipe filters inside {{ ... }} template expressions."),
    (NumIgnoreErrors, PlaybookOrTasks, Count, "Task-level ignore_errors keys."),
    (NumImportPlaybook, PlaybookOrTasks, Count, "import_playbook keys at playbook or task level."),
    (NumImportRole, PlaybookOrTasks, Count, "Task-level import_role keys."),
    (NumImportTasks, PlaybookOrTasks, Count, "Task-level import_tasks keys."),
    (NumInclude, PlaybookOrTasks, Count, "Task-level include keys."),
    (NumIncludeRole, PlaybookOrTasks, Count, "Task-level include_role keys."),
    (NumIncludeTasks, PlaybookOrTasks, Count, "Task-level include_tasks keys."),
    (NumIncludeVars, PlaybookOrTasks, Count, "Task-level include_vars keys."),
    (NumKeys, PlaybookOrTasks, Count, "Total mapping keys in the document tree."),
    (NumLookups, PlaybookOrTasks, Count, "lookup( calls in template expressions and when clauses."),
    (NumNameWithVariables, PlaybookOrTasks, Count, "name values containing a {{variable}} reference."),
    (NumTasks, PlaybookOrTasks, Count, "Leaf tasks (module invocations), including those nested in blocks."),
    (NumUniqueNames, PlaybookOrTasks, Count, "name values occurring exactly once at play, block or task level."),
];

impl Metric {
    /// Position in [`Metric::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Whether the metric applies to files of the given kind; non-applicable
    /// metrics are still reported, with value 0.
    pub fn applicable_to(self, kind: FileKind) -> bool {
        match self.scope() {
            Scope::General => true,
            Scope::Playbook => kind == FileKind::Playbook,
            Scope::PlaybookOrTasks => matches!(kind, FileKind::Playbook | FileKind::TasksFile),
        }
    }
}
