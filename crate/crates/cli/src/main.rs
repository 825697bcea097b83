mod args;
mod artifact;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Cycle(a) => commands::cycle(a),
        Command::PowerSweep(a) => commands::power_sweep(a),
        Command::EmpCurve(a) => commands::emp_curve(a),
        Command::Scaling(a) => commands::scaling(a),
        Command::Lowdiss(a) => commands::lowdiss(a),
    };
    match outcome {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("carnot: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
