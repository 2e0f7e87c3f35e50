mod args;
mod commands;
mod source;

use std::fmt;
use std::fs;
use std::process::ExitCode;

use clap::Parser;

use args::{ChainAction, Cli, Command, Opts};
use ccd_lab::Error;

/// Failure classes mapped onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Tolerance(String),
    Theorem(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Tolerance(_) => 2,
            CliError::Theorem(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Tolerance(m) => write!(f, "tolerance failure: {m}"),
            CliError::Theorem(m) => write!(f, "theorem violation: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Structure(_) | Error::NoConvergence { .. } | Error::Tolerance { .. } => CliError::Tolerance(msg),
            Error::TheoremViolation(_) => CliError::Theorem(msg),
            _ => CliError::Input(msg),
        }
    }
}

/// Rendered report plus any check failures found while producing it. The
/// report is written even when checks fail.
pub struct Outcome {
    pub text: String,
    pub failure: Option<CliError>,
}

impl Outcome {
    pub fn ok(text: String) -> Self {
        Self { text, failure: None }
    }
}

fn opts(cmd: &Command) -> &Opts {
    match cmd {
        Command::Ccd(o)
        | Command::Capacity(o)
        | Command::Spectrum(o)
        | Command::Polar(o)
        | Command::McCapacity(o)
        | Command::Symeig(o) => o,
        Command::Spinchain { action } => match action {
            ChainAction::Kramers(o) | ChainAction::Tmin(o) | ChainAction::Sweep(o) => o,
        },
    }
}

fn configure_threads(o: &Opts) -> Result<(), CliError> {
    let threads = match o.threads {
        Some(t) => Some(t),
        None => match std::env::var("CCD_LAB_THREADS") {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Input(format!("CCD_LAB_THREADS={v:?} is not a count")))?,
            ),
            _ => None,
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Input("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let o = opts(&cli.command);
    configure_threads(o)?;
    match &cli.command {
        Command::Ccd(o) => commands::ccd(o),
        Command::Capacity(o) => commands::capacity(o),
        Command::Spectrum(o) => commands::spectrum(o),
        Command::Polar(o) => commands::polar(o),
        Command::McCapacity(o) => commands::mc_capacity(o),
        Command::Symeig(o) => commands::symeig(o),
        Command::Spinchain { action } => match action {
            ChainAction::Kramers(o) => commands::kramers(o),
            ChainAction::Tmin(o) => commands::tmin(o),
            ChainAction::Sweep(o) => commands::sweep(o),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("ccd-lab: {e}");
            return ExitCode::from(e.code());
        }
    };
    let written = match &opts(&cli.command).output {
        Some(path) => fs::write(path, &outcome.text),
        None => {
            print!("{}", outcome.text);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("ccd-lab: cannot write output: {e}");
        return ExitCode::from(1);
    }
    match outcome.failure {
        Some(e) => {
            eprintln!("ccd-lab: {e}");
            ExitCode::from(e.code())
        }
        None => ExitCode::SUCCESS,
    }
}
