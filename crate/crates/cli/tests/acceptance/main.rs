//! End-to-end acceptance checks for the analyzer and the scan pipeline.
//!
//! Each test prints one PASS line when its criterion holds; a panic marks
//! the criterion failed. The randomized corpus test compares the analyzer
//! against the independent naive oracle in `oracle.rs`.


use std::collections::HashSet;
use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use iac_metrics::{
    compute_all, lex_expression, parse_source, text_entropy, AnalysisOptions, FileKind,
    KnowledgeBase, Metric, MetricsReport, TokenKind,
};
use iac_metrics_cli::{emit_csv, emit_json, report_failed, scan, ScanConfig};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use regex::Regex;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn scan_one(path: PathBuf) -> MetricsReport {
    let config = ScanConfig { roots: vec![path], ..ScanConfig::default() };
    let mut summary = scan(&config).expect("scan succeeds");
    assert_eq!(summary.reports.len(), 1, "exactly one report expected");
    summary.reports.remove(0)
}

fn count(report: &MetricsReport, metric: Metric) -> u64 {
    report.value(metric).as_count().unwrap_or_else(|| panic!("{metric:?} is a count"))
}

fn real(report: &MetricsReport, metric: Metric) -> f64 {
    report.value(metric).as_f64()
}

#[test]
fn playbook_line_and_task_metrics() {
    let started = Instant::now();
    let report = scan_one(fixture("webservers_databases_playbook.yml"));
    let elapsed = started.elapsed();

    assert_eq!(report.kind, FileKind::Playbook);
    assert_eq!(count(&report, Metric::LinesSourceCode), 20);
    assert_eq!(count(&report, Metric::LinesBlank), 4);
    assert_eq!(count(&report, Metric::LinesComment), 0);
    assert_eq!(count(&report, Metric::NumPlays), 2);
    assert_eq!(count(&report, Metric::NumTasks), 3);
    assert_eq!(real(&report, Metric::AvgPlaySize), 10.0);
    assert_eq!(real(&report, Metric::AvgTaskSize), 4.0);
    assert_eq!(count(&report, Metric::NumDistinctModules), 2);
    assert_eq!(count(&report, Metric::NumVariables), 1);
    assert_eq!(count(&report, Metric::NumUniqueNames), 3);
    assert!(report.applicable(Metric::NumPlays));
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "single small playbook took {elapsed:?}, expected well under a second"
    );

    println!("PASS: two-play playbook reports the pinned line, play and task metrics in under a second");
}

#[test]
fn tasks_file_ported_key_metrics() {
    let report = scan_one(fixture("config_perms_tasks.yml"));

    assert_eq!(report.kind, FileKind::TasksFile);
    assert_eq!(count(&report, Metric::NumTasks), 3);
    assert_eq!(count(&report, Metric::NumInclude), 1);
    assert_eq!(count(&report, Metric::NumParameters), 3);
    assert_eq!(count(&report, Metric::NumFile), 1);
    assert_eq!(count(&report, Metric::NumFileMode), 1);
    assert_eq!(count(&report, Metric::NumEnsure), 1);
    assert_eq!(count(&report, Metric::NumConditions), 2);
    assert_eq!(count(&report, Metric::NumDecisions), 1);
    assert_eq!(count(&report, Metric::NumSSH), 0);
    assert_eq!(count(&report, Metric::NumURLs), 0);
    assert_eq!(count(&report, Metric::NumDeprecatedModules), 1);
    assert_eq!(count(&report, Metric::NumDeprecatedKeywords), 1);
    assert_eq!(count(&report, Metric::NumFactModules), 1);
    assert_eq!(count(&report, Metric::NumDistinctModules), 2);
    assert_eq!(real(&report, Metric::AvgTaskSize), 3.0);

    // Playbook-only metrics are out of scope for a tasks file.
    assert_eq!(count(&report, Metric::NumPlays), 0);
    assert!(!report.applicable(Metric::NumPlays));
    assert_eq!(count(&report, Metric::NumRoles), 0);
    assert!(!report.applicable(Metric::NumRoles));

    println!("PASS: tasks file reports the pinned include, stat/file, condition and scope metrics");
}

#[test]
fn blocks_fixture_module_and_name_metrics() {
    let report = scan_one(fixture("blocks_error_handling.yml"));

    assert_eq!(report.kind, FileKind::TasksFile);
    assert_eq!(count(&report, Metric::NumBlocks), 2);
    assert_eq!(count(&report, Metric::NumBlocksErrorHandling), 1);
    assert_eq!(count(&report, Metric::NumIgnoreErrors), 1);
    assert_eq!(count(&report, Metric::NumSuspiciousComments), 1);
    assert_eq!(count(&report, Metric::NumTasks), 6);
    assert_eq!(count(&report, Metric::NumDistinctModules), 4);
    assert_eq!(count(&report, Metric::NumUniqueNames), 5);
    assert_eq!(count(&report, Metric::NumNameWithVariables), 0);
    assert_eq!(count(&report, Metric::NumConditions), 1);
    assert_eq!(count(&report, Metric::NumCommands), 1);

    println!("PASS: block/rescue/always file reports the pinned block, module and name metrics");
}

#[test]
fn random_corpus_matches_naive_oracle() {
    let kb = KnowledgeBase::builtin();
    let options = AnalysisOptions::default();
    let mut total_docs = 0;
    let seeds: u64 = std::env::var("CORPUS_SEEDS").ok().and_then(|s| s.parse().ok()).unwrap_or(120);

    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = oracle::gen_file(&mut rng);
        total_docs += model.docs.len();
        let emitted = oracle::emit(&model);
        let expected = oracle::expected_metrics(&model, &emitted);

        let file = parse_source(format!("corpus_{seed}.yml"), emitted.text.clone());
        assert!(
            file.diagnostics.is_empty(),
            "seed {seed}: generated file should parse cleanly, got {:?}\n{}",
            file.diagnostics,
            emitted.text
        );
        let report = compute_all(&file, kb, &options);
        assert_eq!(
            report.kind,
            oracle::expected_kind(&model),
            "seed {seed}: file kind mismatch\n{}",
            emitted.text
        );

        for metric in Metric::ALL {
            let want = expected[&metric];
            let got = report.value(metric).as_f64();
            let ok = if metric == Metric::TextEntropy {
                (want - got).abs() <= 1e-9
            } else {
                want == got
            };
            assert!(
                ok,
                "seed {seed}: {metric:?} mismatch: oracle {want}, analyzer {got}\n{}",
                emitted.text
            );
        }
    }

    assert!(total_docs >= 100, "corpus too small: {total_docs} documents");
    println!(
        "PASS: {seeds} generated files ({total_docs} documents) match the independent metric oracle"
    );
}

#[test]
fn entropy_properties_hold() {
    const POOL: [&str; 8] = ["alpha", "beta", "gamma", "delta", "x", "y", "0", "=="];
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    for _ in 0..1000 {
        let len = rng.gen_range(0..40);
        let mut tokens: Vec<&str> = (0..len).map(|_| POOL[rng.gen_range(0..POOL.len())]).collect();
        let entropy = text_entropy(&tokens);

        let distinct = tokens.iter().collect::<HashSet<_>>().len();
        assert!(entropy >= 0.0, "entropy must be non-negative, got {entropy}");
        let bound = if distinct <= 1 { 0.0 } else { (distinct as f64).log2() };
        assert!(
            entropy <= bound + 1e-9,
            "entropy {entropy} exceeds log2({distinct}) = {bound}"
        );

        tokens.shuffle(&mut rng);
        let shuffled = text_entropy(&tokens);
        assert_eq!(
            entropy.to_bits(),
            shuffled.to_bits(),
            "entropy must be permutation-invariant bit for bit"
        );
    }

    assert_eq!(text_entropy::<&str>(&[]), 0.0);
    let uniform = text_entropy(&["a", "b"]);
    assert!((uniform - 1.0).abs() < 1e-12, "two equally likely symbols carry one bit, got {uniform}");
    let skewed = text_entropy(&["a", "a", "a", "b"]);
    let expected = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
    assert!((skewed - expected).abs() < 1e-12);

    println!("PASS: token entropy is bounded, permutation-invariant and exact on known distributions");
}

/// Regex-based reference lexer: ordered alternation mirrors longest-match.
fn reference_lex(input: &str) -> Vec<(TokenKind, String)> {
    let re = Regex::new(r"\*\*|//|>=|<=|==|!=|[><+\-/%*|]|[A-Za-z_][A-Za-z0-9_]*|[0-9]+|\S")
        .expect("valid regex");
    let mut out = Vec::new();
    for found in re.find_iter(input) {
        let text = found.as_str();
        let kind = match text {
            "**" | "//" | "+" | "-" | "/" | "%" | "*" => TokenKind::MathOp,
            ">=" | "<=" | "==" | "!=" | ">" | "<" => TokenKind::ComparisonOp,
            "|" => TokenKind::FilterPipe,
            "and" | "or" | "not" => TokenKind::BooleanOp,
            "is" | "in" => TokenKind::ComparisonOp,
            "lookup" => {
                let rest = &input[found.end()..];
                if rest.trim_start().starts_with('(') {
                    TokenKind::LookupCall
                } else {
                    TokenKind::Identifier
                }
            }
            _ if text.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') => {
                TokenKind::Identifier
            }
            _ if text.starts_with(|c: char| c.is_ascii_digit()) => TokenKind::Literal,
            _ => TokenKind::Other,
        };
        out.push((kind, text.to_string()));
    }
    out
}

#[test]
fn lexer_longest_match_and_when_tokens() {
    const ALPHABET: [char; 15] =
        ['*', '/', '>', '<', '=', '!', '+', '-', '%', '|', ' ', 'a', '3', '(', ')'];
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    for round in 0..500 {
        let len = rng.gen_range(0..14);
        let input: String = (0..len).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())]).collect();
        let got: Vec<(TokenKind, String)> =
            lex_expression(&input).into_iter().map(|t| (t.kind, t.text)).collect();
        let want = reference_lex(&input);
        assert_eq!(got, want, "round {round}: lexer disagrees with reference on {input:?}");
    }

    // Multi-character operators must win over their single-character prefixes.
    let ops: Vec<(TokenKind, String)> =
        lex_expression("a >= b ** c // d != e").into_iter().map(|t| (t.kind, t.text)).collect();
    let op_texts: Vec<&str> = ops.iter().map(|(_, text)| text.as_str()).collect();
    assert_eq!(op_texts, ["a", ">=", "b", "**", "c", "//", "d", "!=", "e"]);

    let when = "app_conf.stat.exists is defined and ansible_distribution == 'CentOS'";
    let tokens = lex_expression(when);
    let comparisons = tokens.iter().filter(|t| t.kind == TokenKind::ComparisonOp).count();
    let booleans = tokens.iter().filter(|t| t.kind == TokenKind::BooleanOp).count();
    assert_eq!((comparisons, booleans), (2, 1), "conditional clause token counts");

    println!("PASS: expression lexer matches the regex reference and applies longest-match operators");
}

#[test]
fn reports_complete_and_deterministic() {
    let config = |jobs: usize| ScanConfig {
        roots: vec![fixture("")],
        parallelism: NonZeroUsize::new(jobs),
        ..ScanConfig::default()
    };

    let serial = scan(&config(1)).expect("serial scan");
    let parallel = scan(&config(8)).expect("parallel scan");
    assert!(serial.files_total >= 3, "fixture directory should hold at least three files");

    let json_serial = emit_json(&serial);
    let json_parallel = emit_json(&parallel);
    assert_eq!(json_serial, json_parallel, "JSON must not depend on worker count");
    let csv_serial = emit_csv(&serial, true);
    let csv_parallel = emit_csv(&parallel, true);
    assert_eq!(csv_serial, csv_parallel, "CSV must not depend on worker count");

    // Every file object lists all 46 metrics in catalogue order.
    let names: Vec<&str> = Metric::ALL.iter().map(|m| m.name()).collect();
    let sections: Vec<&str> = json_serial.split("\"metrics\": {").skip(1).collect();
    assert_eq!(sections.len(), serial.files_total, "one metrics object per file");
    for section in &sections {
        let metrics_region = section.split("\"applicable\"").next().expect("applicable follows");
        let mut at = 0;
        for name in &names {
            let key = format!("\"{name}\"");
            let found = metrics_region[at..]
                .find(&key)
                .unwrap_or_else(|| panic!("{name} missing or out of order in JSON metrics"));
            at += found + key.len();
        }
    }

    // JSON parses and agrees with the CSV cells numerically.
    let parsed: serde_json::Value = serde_json::from_str(&json_serial).expect("valid JSON");
    let files = parsed["files"].as_array().expect("files array");
    assert_eq!(files.len(), serial.files_total);

    let mut csv_reader = csv::Reader::from_reader(csv_serial.as_bytes());
    let headers = csv_reader.headers().expect("csv headers").clone();
    assert_eq!(headers.len(), 2 + names.len());
    assert_eq!(&headers[0], "file");
    assert_eq!(&headers[1], "kind");
    for (index, name) in names.iter().enumerate() {
        assert_eq!(&headers[2 + index], *name, "CSV column order matches the catalogue");
    }

    for (row, file_json) in csv_reader.records().zip(files) {
        let row = row.expect("csv row");
        assert_eq!(&row[0], file_json["path"].as_str().expect("path"));
        assert_eq!(&row[1], file_json["kind"].as_str().expect("kind"));
        for (index, name) in names.iter().enumerate() {
            let cell: f64 = row[2 + index].parse().expect("numeric csv cell");
            let from_json = file_json["metrics"][*name].as_f64().expect("numeric json value");
            assert_eq!(cell, from_json, "CSV and JSON disagree on {name} for {}", &row[0]);
        }
        let applicable = file_json["applicable"].as_object().expect("applicable map");
        assert_eq!(applicable.len(), names.len());
    }

    println!("PASS: scan output is worker-count independent and lists all 46 metrics in order in JSON and CSV");
}

#[test]
fn malformed_file_resilience() {
    let dir = tempfile::tempdir().expect("tempdir");
    std::fs::write(
        dir.path().join("site.yml"),
        "---\n- hosts: all\n  tasks:\n  - name: ping the hosts\n    ping:\n",
    )
    .expect("write playbook");
    std::fs::write(
        dir.path().join("tasks.yaml"),
        "---\n- name: install a package\n  yum:\n    name: httpd\n",
    )
    .expect("write tasks");
    // A tab in indentation is a hard YAML error.
    std::fs::write(dir.path().join("broken.yml"), "top:\n\tnested: 1\n").expect("write broken");

    let config = ScanConfig { roots: vec![dir.path().to_path_buf()], ..ScanConfig::default() };
    let summary = scan(&config).expect("scan finishes despite the broken file");
    assert_eq!(summary.files_total, 3);
    assert_eq!(summary.files_parsed, 2);
    assert_eq!(summary.files_failed, 1);

    let broken = summary
        .reports
        .iter()
        .find(|r| r.path.ends_with("broken.yml"))
        .expect("broken file report");
    assert!(report_failed(broken), "broken file must be marked failed");
    assert_eq!(broken.kind, FileKind::Unknown);
    assert!(
        count(broken, Metric::LinesSourceCode) >= 1,
        "raw text metrics survive a parse failure"
    );
    assert!(!broken.diagnostics.is_empty());
    for good in summary.reports.iter().filter(|r| !r.path.ends_with("broken.yml")) {
        assert!(!report_failed(good), "{} wrongly marked failed", good.path);
    }

    // The binary completes with exit 0 by default and exit 1 under --strict.
    let binary = env!("CARGO_BIN_EXE_iac-metrics");
    let lenient = Command::new(binary)
        .args(["analyze"])
        .arg(dir.path())
        .output()
        .expect("run binary");
    assert!(lenient.status.success(), "default mode tolerates broken files");
    let stdout = String::from_utf8(lenient.stdout).expect("utf-8 stdout");
    let parsed: serde_json::Value = serde_json::from_str(&stdout).expect("binary emits valid JSON");
    assert_eq!(parsed["files_failed"], serde_json::json!(1));

    let strict = Command::new(binary)
        .args(["analyze", "--strict"])
        .arg(dir.path())
        .output()
        .expect("run binary strict");
    assert_eq!(strict.status.code(), Some(1), "--strict signals parse failures");

    println!("PASS: a malformed file is diagnosed and skipped without poisoning the scan or the exit path");
}
