//! The `wellform` command line.
//!
//! Every command reads one or more files, runs one analysis per file, and
//! prints either readable text or one JSON document (an array when several
//! files were given). Exit codes: 0 clean, 1 findings, 2 input does not
//! parse, 3 usage or I/O problem. With several files the worst code wins.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

pub use report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "wellform", version, about = "Check, translate, run, and grade diagram exercises")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check activity diagrams against the well-formedness rules.
    Lint {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Translate an activity diagram into structured pseudocode.
    Codegen {
        file: PathBuf,
        /// Write the program here instead of printing it.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        /// Print the one-line outline instead of the canonical program.
        #[arg(long)]
        outline: bool,
    },
    /// Run an activity diagram (or a `.pc` program) and print its trace.
    Simulate {
        file: PathBuf,
        /// Initial binding `name=value`; values are integers or true/false.
        #[arg(long = "set", value_name = "NAME=VALUE")]
        set: Vec<String>,
        /// Maximum number of node visits (statements for programs).
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Check that sequence-diagram fragments nest properly.
    CheckSeq {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Compare an activity diagram with a sequence diagram.
    CheckConsistency { activity: PathBuf, sequence: PathBuf },
    /// Grade submissions against a rubric.
    Grade {
        #[arg(long, value_parser = ["element_diff", "annotation", "hotspot", "placement"])]
        mode: String,
        #[arg(long)]
        rubric: PathBuf,
        #[arg(long, required = true, num_args = 1..)]
        submission: Vec<PathBuf>,
        /// Points deducted per wrong mark, placement, or lint error.
        #[arg(long)]
        penalty: Option<f64>,
    },
    /// Describe a rule id.
    Explain { rule: String },
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run_cli<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let reports = match dispatch(cli.command) {
        Ok(r) => r,
        Err((code, msg)) => {
            let _ = writeln!(stderr, "wellform: {msg}");
            return code;
        }
    };
    emit(&reports, cli.format, stdout, stderr);
    reports.iter().map(|r| r.exit).max().unwrap_or(EXIT_OK)
}

fn dispatch(cmd: Command) -> Result<Vec<Report>, (i32, String)> {
    Ok(match cmd {
        Command::Lint { files } => files.par_iter().map(|f| commands::lint(f)).collect(),
        Command::Codegen { file, output, outline } => vec![commands::codegen(&file, output.as_deref(), outline)],
        Command::Simulate { file, set, budget } => {
            let budget = commands::budget(budget).map_err(|m| (EXIT_USAGE, m))?;
            let env = commands::bindings(&set).map_err(|m| (EXIT_USAGE, m))?;
            vec![commands::simulate(&file, &env, budget)]
        }
        Command::CheckSeq { files } => files.par_iter().map(|f| commands::check_seq(f)).collect(),
        Command::CheckConsistency { activity, sequence } => vec![commands::check_consistency(&activity, &sequence)],
        Command::Grade {
            mode,
            rubric,
            submission,
            penalty,
        } => {
            if penalty.is_some_and(|p| !(p >= 0.0 && p.is_finite())) {
                return Err((EXIT_USAGE, "--penalty must be a non-negative number".into()));
            }
            let key = commands::load_rubric(&rubric, &mode)?;
            submission
                .par_iter()
                .map(|s| commands::grade(&key, s, penalty))
                .collect()
        }
        Command::Explain { rule } => vec![commands::explain(&rule)],
    })
}

fn emit(reports: &[Report], format: Format, stdout: &mut dyn Write, stderr: &mut dyn Write) {
    for r in reports {
        if let Some(msg) = &r.stderr {
            let _ = writeln!(stderr, "{msg}");
        }
    }
    match format {
        Format::Json => {
            let doc = if reports.len() == 1 {
                serde_json::to_string_pretty(&reports[0])
            } else {
                serde_json::to_string_pretty(reports)
            };
            let _ = writeln!(stdout, "{}", doc.expect("reports serialize"));
        }
        Format::Text => {
            for r in reports {
                if reports.len() > 1 {
                    let _ = writeln!(stdout, "== {}", r.file);
                }
                let _ = write!(stdout, "{}", r.text);
            }
        }
    }
}
