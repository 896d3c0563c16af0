//! Command-line surface of the `cotasks` binary: argument parsing, output
//! formatting, and exit codes. All real work happens in [`crate::pipeline`].
//!
//! Exit codes: `0` success, `1` error, `2` validation found schema
//! violations.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::error::CotasksError;
use crate::eval::ConditionId;
use crate::pipeline;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATIONS: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "cotasks",
    version,
    about = "Build chained-subtask VideoQA datasets and score models on them"
)]
pub struct Cli {
    /// Pipeline configuration file (TOML).
    #[arg(short, long, global = true, default_value = "cotasks.toml")]
    pub config: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

fn parse_condition(s: &str) -> Result<ConditionId, String> {
    ConditionId::from_str(s).map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse source annotations and construct the instruction dataset.
    Build,
    /// Check persisted bundles against the dataset schema.
    Validate {
        /// Build run directory or bundle file; defaults to this config's
        /// build run.
        path: Option<PathBuf>,
    },
    /// Print the dataset counts of a build run.
    Stats {
        /// Build run directory; defaults to this config's build run.
        path: Option<PathBuf>,
    },
    /// Query the subject model under one evaluation condition.
    Infer {
        /// baseline | ct12 | ct34 | ct14 | cotask1..cotask4
        #[arg(value_parser = parse_condition)]
        condition: ConditionId,
    },
    /// Rate the predictions of an inference run with the judge model.
    Judge {
        /// Inference run directory.
        run_dir: PathBuf,
    },
    /// Combine judged runs into one condition-by-category table.
    Report {
        /// Judged inference run directories.
        #[arg(required = true)]
        run_dirs: Vec<PathBuf>,
    },
}

/// Parse `std::env::args` and execute. Returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, CotasksError> {
    PipelineConfig::load(&cli.config)
}

/// Build run directory implied by the config, for commands that accept an
/// optional explicit path.
fn default_build_dir(cli: &Cli) -> Result<PathBuf, CotasksError> {
    let config = load_config(cli)?;
    Ok(config.output_dir.join(pipeline::build_dir_name(&config)))
}

/// Execute one parsed invocation. Split from [`run`] so tests can drive the
/// CLI without a process boundary.
pub fn execute(cli: &Cli) -> Result<i32, CotasksError> {
    match &cli.command {
        Command::Build => {
            let out = pipeline::cmd_build(&load_config(cli)?)?;
            print!("{}", out.stats_table);
            println!("run directory: {}", out.run_dir.display());
            Ok(EXIT_OK)
        }
        Command::Validate { path } => {
            let path = match path {
                Some(p) => p.clone(),
                None => default_build_dir(cli)?,
            };
            let out = pipeline::cmd_validate(&path)?;
            for v in &out.violations {
                println!("{}: {} {}", v.qid, v.code, v.detail);
            }
            if out.is_clean() {
                println!("{} bundles checked, no violations", out.checked);
                Ok(EXIT_OK)
            } else {
                println!("{} bundles checked, {} violations", out.checked, out.violations.len());
                Ok(EXIT_VIOLATIONS)
            }
        }
        Command::Stats { path } => {
            let path = match path {
                Some(p) => p.clone(),
                None => default_build_dir(cli)?,
            };
            let (_, table) = pipeline::cmd_stats(&path)?;
            print!("{table}");
            Ok(EXIT_OK)
        }
        Command::Infer { condition } => {
            let out = pipeline::cmd_infer(&load_config(cli)?, *condition)?;
            println!(
                "{} predictions ({} endpoint errors) in {}",
                out.predictions,
                out.endpoint_errors,
                out.run_dir.display()
            );
            Ok(EXIT_OK)
        }
        Command::Judge { run_dir } => {
            let out = pipeline::cmd_judge(&load_config(cli)?, run_dir)?;
            match &out.report {
                Some(report) => {
                    let overall = report
                        .overall
                        .as_ref()
                        .map(|m| format!("{:.1}", m.mean))
                        .unwrap_or_else(|| "-".into());
                    println!(
                        "{}: {} records judged, overall {}",
                        report.condition, out.records, overall
                    );
                }
                None => println!("no predictions to judge in {}", run_dir.display()),
            }
            Ok(EXIT_OK)
        }
        Command::Report { run_dirs } => {
            let out = pipeline::cmd_report(&load_config(cli)?, run_dirs)?;
            print!("{}", out.markdown);
            println!("written to {}", out.run_dir.display());
            Ok(EXIT_OK)
        }
    }
}
