//! `gqads`: key generation, protocol runs, attack campaigns and
//! optimisation sweeps.
//!
//! Exit codes: 0 success, 2 a verifier rejected, 3 usage error,
//! 4 infeasible targets, 1 anything else.

mod args;
mod commands;
mod output;

use std::io::{IsTerminal, Write};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use gqads_core::Error;

use args::{Cli, Command};
use commands::UsageError;

const EXIT_USAGE: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

fn exit_code_for(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::InfeasibleTargets(_) | Error::EmptyFeasibleSet { .. } | Error::NoDivisors(_)) => EXIT_INFEASIBLE,
        Some(Error::Io(_)) | None => 1,
        Some(_) => EXIT_USAGE,
    }
}

fn progress_printer() -> impl FnMut(u64, u64) {
    let tty = std::io::stderr().is_terminal();
    move |done, total| {
        let mut err = std::io::stderr().lock();
        if tty {
            let _ = write!(err, "\rtrial {done}/{total}");
            if done == total {
                let _ = writeln!(err);
            }
        } else if done == total || done % (total / 10).max(1) == 0 {
            let _ = writeln!(err, "trial {done}/{total}");
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = match &cli.command {
        Command::Keygen(a) => commands::keygen(a),
        Command::Run(a) => commands::run(a),
        Command::Attack(a) => commands::attack(a, &mut progress_printer()),
        Command::Optimize(a) => commands::optimize(a),
    };
    match result {
        Ok(report) => {
            let written = match &report.out_file {
                Some(path) => std::fs::write(path, &report.stdout).map_err(|e| format!("writing {}: {e}", path.display())),
                None => std::io::stdout()
                    .lock()
                    .write_all(report.stdout.as_bytes())
                    .map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => ExitCode::from(report.exit_code as u8),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
