//! Command-line front end: optimize a grammar with a configuration, diff
//! two grammars, print size metrics, or re-apply an old configuration to a
//! regenerated grammar and list the stale applications.
//!
//! Exit codes: 0 on success, 1 for unreadable or unparseable inputs, 2 when
//! applications fail (strict mode aborts on the first error or no-match;
//! lenient mode exits 2 only for error outcomes). Diagnostics go to stderr;
//! reports go to stdout or the `--report` file.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use grammar_forge::{
    apply_all, diff_grammars, Catalog, ConfigFile, EngineError, EngineReport, Grammar,
    OutcomeStatus,
};

#[derive(Parser)]
#[command(name = "grammar-forge", version, about = "Rule-based optimizer for generated Xtext-style grammars")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a configuration to a grammar and write the optimized result.
    Optimize {
        /// Grammar to optimize.
        #[arg(short, long)]
        input: PathBuf,
        /// Configuration file listing the rule applications, in order.
        #[arg(short, long)]
        config: PathBuf,
        /// Where to write the optimized grammar.
        #[arg(short, long)]
        output: PathBuf,
        /// Abort on the first application that errors or matches nothing.
        #[arg(long)]
        strict: bool,
        /// Also write the run summary as JSON to this path.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Compare two grammars structurally.
    Diff {
        before: PathBuf,
        after: PathBuf,
        /// Also write the per-rule records as JSON lines to this path.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Print line, rule and call counts for a grammar.
    Metrics {
        grammar: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Re-apply a previous version's configuration to a regenerated
    /// grammar, leniently, and list the applications that went stale.
    Evolve {
        /// The regenerated grammar.
        #[arg(short, long)]
        input: PathBuf,
        /// The previous version's configuration.
        #[arg(short, long)]
        config: PathBuf,
        /// Where to write the optimized grammar.
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the run summary as JSON to this path.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

#[derive(Serialize)]
struct OutcomeRecord {
    index: usize,
    config_line: usize,
    application: String,
    status: OutcomeStatus,
    matched_rules: usize,
    matched_lines: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

/// The machine-readable summary of one optimize/evolve run.
#[derive(Serialize)]
struct RunSummary {
    input_path: String,
    config_path: String,
    output_path: String,
    gora_count: usize,
    applied: usize,
    no_match: usize,
    errors: usize,
    outcomes: Vec<OutcomeRecord>,
    exit_code: u8,
}

impl RunSummary {
    fn new(
        input: &Path,
        config_path: &Path,
        output: &Path,
        config: &ConfigFile,
        report: &EngineReport,
        exit_code: u8,
    ) -> RunSummary {
        let count = |status: OutcomeStatus| {
            report.outcomes.iter().filter(|o| o.status == status).count()
        };
        RunSummary {
            input_path: input.display().to_string(),
            config_path: config_path.display().to_string(),
            output_path: output.display().to_string(),
            gora_count: report.gora_count(),
            applied: count(OutcomeStatus::Applied),
            no_match: count(OutcomeStatus::NoMatch),
            errors: count(OutcomeStatus::Error),
            outcomes: report
                .outcomes
                .iter()
                .enumerate()
                .map(|(index, o)| OutcomeRecord {
                    index,
                    config_line: config.line_of(index),
                    application: o.application.to_string(),
                    status: o.status,
                    matched_rules: o.matched_rules,
                    matched_lines: o.matched_lines,
                    message: o.message.clone(),
                })
                .collect(),
            exit_code,
        }
    }

    fn to_text(&self) -> String {
        let mut out = format!(
            "{} applications: {} applied, {} no-match, {} errors\n",
            self.gora_count, self.applied, self.no_match, self.errors
        );
        for o in &self.outcomes {
            if matches!(o.status, OutcomeStatus::Applied) {
                continue;
            }
            let tag = match o.status {
                OutcomeStatus::NoMatch => "stale",
                OutcomeStatus::Error => "error",
                OutcomeStatus::Applied => unreachable!(),
            };
            out.push_str(&format!(
                "{tag}: line {}: {}{}\n",
                o.config_line,
                o.application,
                o.message.as_deref().map(|m| format!(" ({m})")).unwrap_or_default()
            ));
        }
        out
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_grammar(path: &Path) -> Result<Grammar> {
    let text = read(path)?;
    Grammar::parse(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn emit(report_path: Option<&Path>, stdout_text: &str, machine: &str, format: Format) -> Result<()> {
    match format {
        Format::Text => print!("{stdout_text}"),
        Format::Json => println!("{machine}"),
    }
    if let Some(path) = report_path {
        std::fs::write(path, machine)
            .with_context(|| format!("cannot write report {}", path.display()))?;
    }
    Ok(())
}

fn run_pipeline(
    input: &Path,
    config_path: &Path,
    output: &Path,
    strict: bool,
    report_path: Option<&Path>,
    format: Format,
) -> Result<u8> {
    let catalog = Catalog::builtin();
    let grammar = load_grammar(input)?;
    let config_text = read(config_path)?;
    let config = ConfigFile::parse(&config_text, &config_path.display().to_string(), &catalog)?;

    match apply_all(&grammar, &config.applications, &catalog, strict) {
        Ok((optimized, report)) => {
            let exit_code = if report.has_errors() { 2 } else { 0 };
            std::fs::write(output, optimized.to_text())
                .with_context(|| format!("cannot write {}", output.display()))?;
            let summary =
                RunSummary::new(input, config_path, output, &config, &report, exit_code);
            let machine = serde_json::to_string_pretty(&summary)?;
            emit(report_path, &summary.to_text(), &machine, format)?;
            Ok(exit_code)
        }
        Err(EngineError::StrictAbort { index, outcome }) => {
            eprintln!(
                "{}:{}: {} {}: {}",
                config_path.display(),
                config.line_of(index),
                outcome.application,
                match outcome.status {
                    OutcomeStatus::NoMatch => "matched nothing",
                    _ => "failed",
                },
                outcome.message.as_deref().unwrap_or("no detail")
            );
            Ok(2)
        }
        Err(e @ EngineError::UnknownRule(_)) => Err(e.into()),
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Optimize { input, config, output, strict, report, format } => {
            run_pipeline(&input, &config, &output, strict, report.as_deref(), format)
        }
        Command::Evolve { input, config, output, report, format } => {
            run_pipeline(&input, &config, &output, false, report.as_deref(), format)
        }
        Command::Diff { before, after, report, format } => {
            let before_g = load_grammar(&before)?;
            let after_g = load_grammar(&after)?;
            let diff = diff_grammars(&before_g, &after_g);
            emit(report.as_deref(), &diff.to_text(), &diff.to_jsonl(), format)?;
            Ok(0)
        }
        Command::Metrics { grammar, format } => {
            let g = load_grammar(&grammar)?;
            let m = g.metrics();
            let text = format!("lines: {}\nrules: {}\ncalls: {}\n", m.line_count, m.rule_count, m.call_count);
            emit(None, &text, &serde_json::to_string_pretty(&m)?, format)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
