//! Command-line front end: argument parsing, dispatch and exit codes.

mod args;
mod commands;
mod parse;
pub mod report;

use std::ffi::OsString;
use std::fmt::Display;

use clap::Parser;
use fiberaudit_core::Error;

pub use args::Cli;
use args::Command;

pub const EXIT_INPUT: i32 = 1;

/// A failed run: the diagnostic for stderr and the exit status.
#[derive(Debug)]
pub struct Failure {
    message: String,
    code: i32,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            message: message.into(),
            code: EXIT_INPUT,
        }
    }

    fn context(mut self, what: impl AsRef<std::path::Path>) -> Self {
        self.message = format!("{}: {}", what.as_ref().display(), self.message);
        self
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::NoConvergence(_) => 2,
            _ => EXIT_INPUT,
        };
        Failure {
            message: err.to_string(),
            code,
        }
    }
}

impl Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("FIBERAUDIT_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Failure::input(format!(
                "FIBERAUDIT_THREADS must be a positive integer, got `{v}`"
            ))
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Failure::input(format!("cannot start worker threads: {e}")))
}

fn dispatch(cli: &Cli) -> Result<i32, Failure> {
    let pool = thread_pool()?;
    pool.install(|| match &cli.command {
        Command::Witness(a) => commands::witness(a),
        Command::CubeWitness(a) => commands::cube_witness(a),
        Command::Fiber(a) => commands::fiber(a),
        Command::Lemma(a) => commands::lemma(a),
        Command::ProbeUnion(a) => commands::probe_union(a),
        Command::Boundedness(a) => commands::boundedness(a),
        Command::Urysohn(a) => commands::urysohn(a),
        Command::Quantize(a) => commands::quantize(a),
        Command::Dequantize(a) => commands::dequantize(a),
        Command::Report(a) => commands::report(a),
    })
}

/// Runs the command line `argv` (including the program name) and returns
/// the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("fiberaudit: {failure}");
            failure.code
        }
    }
}
