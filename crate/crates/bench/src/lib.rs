//! Shared helpers for the analyzer benchmarks.

use std::path::PathBuf;

/// Absolute path of a sample file shipped with the core crate.
pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

/// Contents of a sample file shipped with the core crate.
pub fn fixture_text(name: &str) -> String {
    let path = fixture_path(name);
    std::fs::read_to_string(&path).unwrap_or_else(|err| panic!("read {}: {err}", path.display()))
}

pub const FIXTURES: [&str; 3] = [
    "webservers_databases_playbook.yml",
    "config_perms_tasks.yml",
    "blocks_error_handling.yml",
];
