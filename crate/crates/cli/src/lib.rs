//! Batch front end for the `combimots` engine.
//!
//! Exit codes: 0 on success, 1 when `bandit-validate` checks fail, 2 for
//! usage or input errors, 3 for environment faults such as an external
//! oracle that keeps failing.

mod bandit;
mod inputs;
mod metrics;
mod reduce;
mod search;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

/// Environment variable overriding the external oracle timeout, in milliseconds.
pub const TIMEOUT_ENV: &str = "COMBIMOTS_ORACLE_TIMEOUT_MS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ENVIRONMENT: i32 = 3;

const EXIT_HELP: &str = "\
Exit codes:
  0  success
  1  bandit-validate ran but a convergence check failed
  2  usage or input error (bad flags, unreadable or malformed files)
  3  environment fault (external oracle failing on more than half of requests)";

#[derive(Debug, Parser)]
#[command(name = "combimots", version, about = "Pareto Monte-Carlo tree search over building-block spaces", after_help = EXIT_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Keep blocks similar to at least one fragment and count the products they can form.
    Reduce(reduce::ReduceArgs),
    /// Run the tree search and write a manifest plus a JSON-lines report.
    Search(search::SearchArgs),
    /// Score a search report for originality and front quality.
    Metrics(metrics::MetricsArgs),
    /// Simulate a multi-objective bandit and check the selection policy's convergence.
    BanditValidate(bandit::BanditArgs),
}

/// An error carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_INPUT,
            error: error.into(),
        }
    }

    pub fn environment(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_ENVIRONMENT,
            error: error.into(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_INPUT;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let outcome = match cli.command {
        Command::Reduce(a) => reduce::run(&a, stdout, stderr),
        Command::Search(a) => search::run(&a, stdout, stderr),
        Command::Metrics(a) => metrics::run(&a, stdout, stderr),
        Command::BanditValidate(a) => bandit::run(&a, stdout, stderr),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {:#}", e.error);
            e.code
        }
    }
}

fn write_file(path: &PathBuf, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| {
            CliError::input(anyhow::anyhow!("cannot create {}: {e}", parent.display()))
        })?;
    }
    std::fs::write(path, bytes)
        .map_err(|e| CliError::input(anyhow::anyhow!("cannot write {}: {e}", path.display())))
}
