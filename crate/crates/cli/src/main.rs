//! `kvisits` command-line tool.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

const INSTANCE_HELP: &str = "\
Instance files are JSON objects:
  {\"variant\": \"kvisits\", \"k\": 2, \"deadlines\": [2, 2]}
  {\"variant\": \"one_or_two\", \"single\": [1, 3], \"double\": [4]}
  {\"variant\": \"pm\", \"deadlines\": [1, 2], \"targets\": [3, 4]}
NMTS files (for `reduce`) are {\"a\": [..], \"b\": [..], \"t\": [..]}.
Schedules are {\"entries\": [{\"pos\": 1, \"task\": 1, \"role\": \"plain\"}, ..]}
with role one of single, primary, secondary, plain.

Exit codes: 0 yes/success, 1 no/infeasible, 2 undecided or refused by a
cap, 3 usage or input error, 4 internal invariant breach.";

#[derive(Parser, Debug)]
#[command(name = "kvisits", version, about = "Finite pinwheel scheduling solvers, reductions and oracles", after_help = INSTANCE_HELP)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Largest cluster handed to brute-force Position Matching.
    #[arg(long, global = true, env = "KVISITS_BRUTE_CAP", default_value_t = 10)]
    pub brute_cap: usize,
    /// Node budget for exhaustive searches.
    #[arg(long, global = true, env = "KVISITS_STATE_CAP", default_value_t = kvisits::oracle::DEFAULT_NODE_CAP)]
    pub state_cap: u64,
    /// Largest number of distinct deadlines sent to the randomized solver.
    #[arg(long, global = true, env = "KVISITS_P_CAP", default_value_t = 3)]
    pub p_cap: usize,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide an instance and print a verified schedule or matching.
    Solve(commands::SolveArgs),
    /// Check a schedule against an instance.
    Verify(commands::VerifyArgs),
    /// Print the discretized sequence, its clusters and the complement targets.
    Discretize(commands::DiscretizeArgs),
    /// Run the NMTS to Position Matching reduction chain.
    Reduce(commands::ReduceArgs),
    /// Exhaustive searches used as ground truth.
    #[command(subcommand)]
    Oracle(commands::OracleCommand),
    /// Density checks and low-density sweeps.
    Density(commands::DensityArgs),
    /// Report on one member of a threshold family.
    Family(commands::FamilyArgs),
    /// Emit an instance file.
    Generate(commands::GenerateArgs),
    /// Time the solvers on random instances.
    Bench(commands::BenchArgs),
}

/// How a command ended, mapped to the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Yes,
    No,
    Undecided,
}

/// Errors that are the caller's fault.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 3;
    }
    match err.downcast_ref::<kvisits::Error>() {
        Some(kvisits::Error::InvalidInstance(_) | kvisits::Error::Precondition(_)) => 3,
        Some(kvisits::Error::CapExceeded { .. } | kvisits::Error::Overflow(_)) => 2,
        Some(kvisits::Error::Internal(_)) | None => 4,
    }
}

/// Writes the report to `--output` or stdout.
pub fn emit(global: &Global, text: &str) -> anyhow::Result<()> {
    match &global.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Usage(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(Status::Yes) => ExitCode::from(0),
        Ok(Status::No) => ExitCode::from(1),
        Ok(Status::Undecided) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
