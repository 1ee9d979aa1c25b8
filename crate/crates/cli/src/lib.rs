//! The `maurey` command-line driver: parameter sweeps, scaling fits and the
//! verification suites, writing CSV and JSON reports.

pub mod commands;
pub mod config;
pub mod report;
pub mod suites;

use std::ffi::OsString;

use anyhow::Result;
use clap::Parser;

use config::{Cli, CommandName, Settings};
use report::{emit, Report};

/// Exit code for a run whose verification checks did not all pass.
pub const EXIT_CHECKS_FAILED: i32 = 2;

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 on success, 1 on usage or runtime errors, 2 when a
/// verification check fails.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let (name, opts) = cli.command.split();
    let settings = Settings::resolve(name, &opts.merged()?)?;
    if name == CommandName::Verify {
        return verify(&settings);
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(settings.workers).build()?;
    let reports = pool.install(|| commands::run(&settings))?;
    for p in emit(&settings.out_dir, &reports, settings.format)? {
        println!("{}", p.display());
    }
    Ok(0)
}

fn verify(settings: &Settings) -> Result<i32> {
    let names = suites::expand(&settings.suites)?;
    let results = suites::run_with_determinism(&names, settings)?;
    let mut reports = Vec::new();
    for r in &results {
        reports.push(Report::new(format!("verify_{}", r.name), &r.checks)?);
        reports.extend(r.reports.iter().cloned());
    }
    emit(&settings.out_dir, &reports, settings.format)?;
    for r in &results {
        println!("{}", r.summary_line());
    }
    Ok(if results.iter().all(|r| r.passed()) { 0 } else { EXIT_CHECKS_FAILED })
}
