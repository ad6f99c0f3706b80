use std::fmt;
use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod output;

/// A failed run and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Lib(gridvuln::Error),
    /// Invalid combination of options.
    Config(String),
    /// A requested metric has no value for some year.
    Undefined(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        use gridvuln::Error::*;
        match self {
            Failure::Config(_) => 2,
            Failure::Undefined(_) => 3,
            Failure::Lib(e) => match e.root() {
                MalformedRow { .. } | BadHeader { .. } | DuplicateId { .. } | DanglingEndpoint { .. }
                | InvalidInterval { .. } | SelfLoop { .. } | Open { .. } | Io(_) | Csv(_) | Json(_) => 1,
                InvalidParams(_) | InvalidTarget { .. } | NodeOutOfRange { .. } | PartitionMismatch { .. } => 2,
                UndefinedMetric { .. } | EmptySnapshot { .. } | FitImpossible(_) | NormalizationUndefined(_)
                | CorrelationUndefined(_) => 3,
                Infeasible(_) | BudgetExceeded { .. } => 4,
                InYear { .. } => unreachable!("root looks through year annotations"),
            },
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Config(m) | Failure::Undefined(m) => f.write_str(m),
        }
    }
}

impl From<gridvuln::Error> for Failure {
    fn from(e: gridvuln::Error) -> Self {
        Failure::Lib(e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = args::Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
