//! Command-line front end for `wpscript-core`.
//!
//! Exit codes: 0 success or Holds, 1 failed run or counterexample, 2 input
//! error, 3 construct the symbolic engine does not support.

pub mod args;
pub mod certfile;
pub mod commands;
pub mod corpus;
pub mod error;
pub mod input;
pub mod json;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::commands::Report;
use crate::error::{CliError, Status};

fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    let oracle = input::oracle(&cli.oracle);
    match &cli.command {
        Command::Run {
            script,
            stack,
            msg,
            time,
        } => commands::run(&oracle, script, stack, msg.clone(), time.clone()),
        Command::Wp { script, post, tree } => commands::wp(script, post.as_deref(), *tree),
        Command::CheckWp {
            script,
            formula,
            post,
        } => commands::check_wp(&oracle, &cli.domain, script, formula, post.as_deref()),
        Command::Equiv { left, right } => commands::equiv(&oracle, &cli.domain, left, right),
        Command::Certify { certificate } => commands::certify(&oracle, &cli.domain, certificate),
        Command::Corpus { dir, write } => {
            if *write {
                corpus::write_corpus(dir)
            } else {
                corpus::check(&oracle, &cli.domain, dir)
            }
        }
    }
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() {
                Status::InputError.code()
            } else {
                Status::Ok.code()
            };
        }
    };
    match dispatch(&cli) {
        Ok(report) => {
            if cli.json {
                let _ = writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&report.json).expect("json value")
                );
            } else {
                let _ = writeln!(out, "{}", report.text);
            }
            report.status.code()
        }
        Err(e) => {
            let status = e.status();
            if cli.json {
                let body = serde_json::json!({ "error": e.to_string(), "exit": status.code() });
                let _ = writeln!(out, "{body}");
            }
            let _ = writeln!(err, "error: {e}");
            status.code()
        }
    }
}
