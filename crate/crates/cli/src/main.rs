use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::sync::LazyLock;

use clap::{Args, Parser, Subcommand, ValueEnum};

use iac_metrics::{AnalysisOptions, EnsureRegexMode};
use iac_metrics_cli::{emit_csv, emit_json, metric_reference, scan, ScanConfig};

static METRIC_REFERENCE: LazyLock<String> = LazyLock::new(metric_reference);

/// Static analyzer for Ansible YAML: parses playbooks and task files and
/// reports a catalogue of 46 quality metrics per file.
#[derive(Parser)]
#[command(name = "iac-metrics", version, after_long_help = METRIC_REFERENCE.as_str())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze files or directories and emit a metrics report.
    #[command(after_long_help = METRIC_REFERENCE.as_str())]
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Files or directories to scan. Directories are walked recursively;
    /// explicitly named files are analyzed regardless of extension.
    #[arg(required = true, value_name = "PATHS")]
    paths: Vec<PathBuf>,

    /// Report format.
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,

    /// Write the report to FILE instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Knowledge file overriding the built-in module and keyword lists.
    #[arg(long, value_name = "FILE", env = "IAC_METRICS_KB")]
    kb: Option<PathBuf>,

    /// Exit with status 1 if any file fails to parse (the scan still
    /// completes and reports every file).
    #[arg(long)]
    strict: bool,

    /// Comma-separated file extensions scanned inside directories.
    #[arg(long, value_delimiter = ',', default_value = "yml,yaml", value_name = "LIST")]
    ext: Vec<String>,

    /// Number of worker threads; 0 means one per CPU.
    #[arg(long, default_value_t = 0, value_name = "N")]
    jobs: usize,

    /// How dots in the existence-check pattern are interpreted.
    #[arg(long, value_enum, default_value_t = EnsureRegexArg::Escaped)]
    ensure_regex: EnsureRegexArg,
}

#[derive(ValueEnum, Clone, Copy)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy)]
enum EnsureRegexArg {
    /// Dots match only literal dots: `\w+\.stat\.\w+ is defined`.
    Escaped,
    /// Dots match any character: `\w+.stat.\w+ is defined`.
    Literal,
}

impl From<EnsureRegexArg> for EnsureRegexMode {
    fn from(arg: EnsureRegexArg) -> Self {
        match arg {
            EnsureRegexArg::Escaped => EnsureRegexMode::Escaped,
            EnsureRegexArg::Literal => EnsureRegexMode::Literal,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Analyze(args) => run_analyze(args),
    };
    std::process::exit(code);
}

fn run_analyze(args: AnalyzeArgs) -> i32 {
    let extensions = args
        .ext
        .iter()
        .map(|e| e.trim().trim_start_matches('.').to_ascii_lowercase())
        .filter(|e| !e.is_empty())
        .collect();

    let config = ScanConfig {
        roots: args.paths,
        extensions,
        kb_path: args.kb,
        strict: args.strict,
        parallelism: NonZeroUsize::new(args.jobs),
        analysis: AnalysisOptions {
            ensure_regex: args.ensure_regex.into(),
            ..Default::default()
        },
    };

    let summary = match scan(&config) {
        Ok(summary) => summary,
        Err(err) => {
            eprintln!("error: {err}");
            return 2;
        }
    };

    for warning in &summary.walk_diagnostics {
        eprintln!("warning: {warning}");
    }
    for report in &summary.reports {
        for diagnostic in &report.diagnostics {
            eprintln!("{}: {}", report.path, diagnostic);
        }
    }

    let output = match args.format {
        FormatArg::Json => emit_json(&summary),
        FormatArg::Csv => emit_csv(&summary, true),
    };

    if let Some(path) = &args.out {
        if let Err(err) = std::fs::write(path, &output) {
            eprintln!("error: cannot write {}: {err}", path.display());
            return 2;
        }
    } else {
        print!("{output}");
    }

    eprintln!(
        "{} files scanned: {} parsed, {} failed",
        summary.files_total, summary.files_parsed, summary.files_failed
    );

    if config.strict && summary.files_failed > 0 {
        1
    } else {
        0
    }
}
