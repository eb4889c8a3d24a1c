//! Command-line experiments over the `poispred-core` library.
//!
//! Every command produces a [`Document`]: a table or JSON record plus the
//! provenance needed to reproduce it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use clap::{Parser, Subcommand};
use poispred_core::Error;

pub mod args;
pub mod commands;
pub mod output;

pub use output::{Body, Document, Format, Provenance, Table, TIMESTAMP_KEY};

#[derive(Parser, Debug)]
#[command(name = "poispred", author, version, about = "Poisson predictive densities and their KL risks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Predictive pmf table or samples
    Predict(args::PredictArgs),
    /// Risk difference between the Jeffreys and shrinkage predictives over a mu grid
    Figure1(args::Figure1Args),
    /// KL risk at one parameter value
    Risk(args::RiskArgs),
    /// Plug-in risk against the shrinkage Bayes risk
    Theorem5(args::Theorem5Args),
    /// Truncated-prior Bayes risk gap and its upper bound
    Blyth(args::BlythArgs),
    /// Risk difference as the future exposure grows
    Asymptotics(args::AsymptoticsArgs),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                Error::Domain(_) | Error::Propriety { .. } | Error::Dimension { .. } => 2,
                Error::Guard(_) | Error::SupportExplosion { .. } => 3,
                Error::Convergence { .. } | Error::NonFiniteIntegrand { .. } | Error::Evaluation { .. } => 4,
            },
        }
    }
}

/// A rendered result and where it should go.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub text: String,
    pub out: String,
}

/// Runs a parsed command; `command_line` is recorded in the provenance.
pub fn run(cli: &Cli, command_line: &str) -> Result<Rendered, CliError> {
    let cmd = command_line.to_string();
    let (doc, format, out) = match &cli.command {
        Command::Predict(a) => (commands::predict(a, cmd)?, a.format, &a.out.out),
        Command::Figure1(a) => (commands::figure1(a, cmd)?, Format::Csv, &a.out.out),
        Command::Risk(a) => (commands::risk(a, cmd)?, Format::Json, &a.out.out),
        Command::Theorem5(a) => (commands::theorem5(a, cmd)?, Format::Csv, &a.out.out),
        Command::Blyth(a) => (commands::blyth(a, cmd)?, Format::Csv, &a.out.out),
        Command::Asymptotics(a) => (commands::asymptotics(a, cmd)?, Format::Csv, &a.out.out),
    };
    Ok(Rendered { text: doc.render(format), out: out.clone() })
}

/// Parses and runs, without writing anything. `args` excludes the program name.
pub fn run_args<I, S>(args: I) -> Result<Rendered, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(std::iter::once("poispred".to_string()).chain(args.iter().cloned()))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    run(&cli, &args.join(" "))
}

/// Drops the timestamp so two runs can be compared byte for byte.
pub fn strip_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.contains(TIMESTAMP_KEY))
        .map(|l| format!("{l}\n"))
        .collect()
}
