//! Command-line front end: resolves flags and config files into a
//! [`config::RunConfig`], runs one pipeline and writes a JSON report.
//!
//! Exit status: 0 when every expectation holds, 1 on a verification failure
//! or pipeline error, 2 on usage or configuration errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use crate::commands::{dispatch, Failure};
use crate::config::{resolve, Cli};
use crate::report::{Findings, Report, Status};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let cfg = match resolve(cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };

    let mut findings = Findings::default();
    let outcome = dispatch(&cfg, &mut findings);
    let error = outcome.as_ref().err().map(|f| f.message().to_string());
    let report = Report::new(&cfg, findings, error);
    let text = report.to_json();

    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: writing {}: {e}", path.display());
                return EXIT_FAILED;
            }
            println!("{}: {:?} ({})", report.command, report.status, path.display());
        }
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    for e in report.expectations.iter().filter(|e| !e.passed) {
        eprintln!("FAILED: {} ({})", e.name, e.detail);
    }
    match outcome {
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Pipeline(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILED
        }
        Ok(()) if report.status == Status::Ok => EXIT_OK,
        Ok(()) => EXIT_FAILED,
    }
}
