//! `tablint`: lint, fix and linearize table corpora, and compute annotation
//! statistics.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tablint::rules::Rules;

#[derive(Debug, Parser)]
#[command(name = "tablint", version, about = "Lint and correct tabular inputs for table-to-text generation")]
pub struct Cli {
    /// Rules file (TOML). Built-in defaults are used when absent.
    #[arg(long, global = true)]
    rules: Option<PathBuf>,

    /// Maximum rows before a table is rejected.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    max_rows: Option<u64>,

    /// Maximum columns before a table is rejected.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    max_cols: Option<u64>,

    /// Records kept from a non-atomic cell; 0 keeps all.
    #[arg(long, global = true)]
    max_records: Option<usize>,

    /// Trim oversized tables instead of rejecting them.
    #[arg(long, global = true)]
    truncate: bool,

    #[arg(long, global = true, value_enum, default_value_t = Format::Structured)]
    format: Format,

    /// Output file; standard output when absent.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// One JSON record per line.
    Structured,
    /// Aligned text tables or bare linearized strings.
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupBy {
    ModelPhase,
    ProblemType,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Round-trip a linearized corpus, one record per line.
    Parse {
        /// Input file, or `-` for standard input.
        input: PathBuf,
    },
    /// Report input problems for each table in a JSONL corpus.
    Lint { input: PathBuf },
    /// Correct each table and emit the result with its edit trail.
    Fix { input: PathBuf },
    /// Summarize an annotation corpus.
    Stats {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = GroupBy::ModelPhase)]
        group_by: GroupBy,
    },
    /// Fleiss' kappa over a rating matrix or three-annotator label file.
    Kappa {
        input: PathBuf,
        /// Labels per item; taken from the first item when absent.
        #[arg(long)]
        raters: Option<usize>,
    },
    /// Wrap linearized tables in a prompt template.
    Prompt {
        input: PathBuf,
        #[arg(long, default_value = "generic_summary")]
        template: String,
        /// Only the record on this 1-based line.
        #[arg(long)]
        record: Option<usize>,
    },
}

/// Process outcome, ordered by precedence when several apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok = 0,
    Findings = 3,
    Invalid = 1,
    Fatal = 2,
}

impl Status {
    fn code(self) -> u8 {
        self as u8
    }
}

impl Cli {
    fn load_rules(&self) -> tablint::Result<Rules> {
        let mut rules = match &self.rules {
            Some(path) => Rules::load(path)?,
            None => Rules::default(),
        };
        if let Some(n) = self.max_rows {
            rules.limits.max_rows = n as usize;
        }
        if let Some(n) = self.max_cols {
            rules.limits.max_cols = n as usize;
        }
        if let Some(n) = self.max_records {
            rules.split.max_records = n;
        }
        if self.truncate {
            rules.limits.truncate = true;
        }
        rules.check()?;
        Ok(rules)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match run(&cli) {
        Ok(status) => status,
        Err(e) if e.is_broken_pipe() => Status::Ok,
        Err(e) => {
            eprintln!("tablint: {e}");
            Status::Fatal
        }
    };
    ExitCode::from(status.code())
}

fn run(cli: &Cli) -> Result<Status, io::CliError> {
    let rules = cli.load_rules()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
        .map_err(|e| io::CliError::Other(e.to_string()))?;
    let mut out = io::Output::open(cli.output.as_deref())?;
    let status = pool.install(|| commands::dispatch(cli, &rules, &mut out))?;
    out.finish()?;
    Ok(status)
}
