//! `terrain-plan`: batch front end for surfaces, masks, plans and benchmarks.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 bad input, 3 infeasible
//! goal, 4 no solution within the budget.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod cache;
mod commands;
mod manifest;

use std::fmt;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    InfeasibleGoal = 3,
    Timeout = 4,
}

/// Marks an error caused by the user's input rather than by the run.
#[derive(Debug)]
pub struct InputError(String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_error(e: impl fmt::Display) -> anyhow::Error {
    anyhow::Error::new(InputError(format!("{e:#}")))
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Surfaces(common) => commands::surfaces(common),
        Command::Mask(common) => commands::mask(common),
        Command::Plan(args) => commands::run_plan(args),
        Command::Benchmark(args) => commands::benchmark(args),
        Command::Synth { scenario, out } => commands::synth(scenario, out),
    };
    let code = match outcome {
        Ok(code) => code as i32,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<InputError>()) {
                2
            } else {
                1
            }
        }
    };
    std::process::exit(code);
}
