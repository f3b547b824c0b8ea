//! `flowmimic`: train, distill and evaluate network-flow classifiers
//! from the command line.
//!
//! The workflow mirrors the library: `split` partitions a labeled CSV,
//! `train-teacher` picks and fits a model on the sensitive part,
//! `annotate` labels the public part with it, `train-student` fits the
//! shareable model on those annotations, and `evaluate` checks the
//! student against the teacher on held-out rows. `pipeline` runs all
//! of that in one process. Every command writes a run manifest with
//! input and output checksums so results can be reproduced and
//! verified.

mod args;
mod clock;
mod commands;
mod config;
mod exit;
mod manifest;
mod render;

use std::env;
use std::process;

use clap::Parser;
use flowmimic::ModelRole;

use crate::args::{Cli, Command};
use crate::exit::CliError;

fn main() {
    // Rust masks SIGPIPE, turning `flowmimic ... | head` into a panic
    // on the first print after the reader is gone. Restore the Unix
    // default: die quietly like any other filter.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests land here too; only genuine
            // usage mistakes take the usage exit code.
            let code = if err.exit_code() == 0 { 0 } else { exit::EXIT_USAGE };
            let _ = err.print();
            process::exit(code);
        }
    };

    let outcome = init_thread_pool()
        .and_then(|()| clock::resolve(cli.timestamp))
        .and_then(|timestamp| match &cli.command {
            Command::Split(a) => commands::split(a, timestamp),
            Command::TrainTeacher(a) => commands::train(a, ModelRole::Teacher, timestamp),
            Command::TrainStudent(a) => commands::train(a, ModelRole::Student, timestamp),
            Command::Annotate(a) => commands::annotate(a, timestamp),
            Command::Evaluate(a) => commands::evaluate(a, timestamp),
            Command::Pipeline(a) => commands::pipeline(a, timestamp),
            Command::GenData(a) => commands::gen_data(a, timestamp),
        });

    match outcome {
        Ok(code) => process::exit(code),
        Err(err) => {
            eprintln!("flowmimic: {err}");
            process::exit(err.exit_code());
        }
    }
}

/// `FLOWMIMIC_THREADS` caps the worker pool; unset keeps the default
/// of one worker per core. Outputs do not depend on the level.
fn init_thread_pool() -> Result<(), CliError> {
    let raw = match env::var("FLOWMIMIC_THREADS") {
        Ok(raw) => raw,
        Err(env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(CliError::Usage(format!("FLOWMIMIC_THREADS is unreadable: {e}"))),
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "FLOWMIMIC_THREADS must be a positive integer, got `{raw}`"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Internal(format!("thread pool setup: {e}")))
}
