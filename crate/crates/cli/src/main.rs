mod args;
mod commands;
mod config;
mod failure;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Ctx;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        json: cli.json,
        out: cli.out.clone(),
        tol: cli.tol,
        seed: cli.seed,
    };
    let result = match &cli.command {
        Command::Simulate(run) => commands::simulate(&ctx, run),
        Command::Analyze(args) => commands::analyze(&ctx, args),
        Command::Threshold(flags) => commands::threshold(&ctx, flags),
        Command::Fold(run) => commands::fold(&ctx, run),
        Command::Models => commands::models(&ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code())
        }
    }
}
