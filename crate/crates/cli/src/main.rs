use std::panic;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fastbelief_cli::commands::{self, Console, Options, SelectAlpha};
use fastbelief_cli::ExitStatus;

/// Online strongly convex optimizer laboratory.
#[derive(Debug, Parser)]
#[command(name = "fastbelief", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (overrides the config's `out`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Run seed (overrides the config's `seed`).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// How `compare` picks each optimizer's stepsize.
    #[arg(long, global = true, value_enum, default_value_t = Select::FinalLoss)]
    select_alpha: Select,

    /// Trace CSV to check or to take cumulative losses from.
    #[arg(long, global = true, value_name = "PATH")]
    trace: Option<PathBuf>,

    /// Fixed value of the bound multiplier r instead of the measured one.
    #[arg(long, global = true, value_name = "R")]
    r: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Select {
    #[value(name = "final_loss")]
    FinalLoss,
    #[value(name = "final_regret")]
    FinalRegret,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one (optimizer, alpha) cell and write its trace.
    Run,
    /// Sweep every optimizer over its alpha grid and chart the best cells.
    Compare,
    /// Check the stepsize conditions of one trajectory.
    Check,
    /// Compare empirical regret with the closed-form bound.
    Bound,
    /// Tabulate stepsizes in the three curvature regions.
    Probe,
}

fn dispatch(cli: Cli) -> ExitStatus {
    let opts = Options {
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        select: match cli.select_alpha {
            Select::FinalLoss => SelectAlpha::FinalLoss,
            Select::FinalRegret => SelectAlpha::FinalRegret,
        },
        trace: cli.trace,
        r: cli.r,
    };
    let console = Console::detect();
    let result = match cli.command {
        Command::Run => commands::cmd_run(&opts, &console),
        Command::Compare => commands::cmd_compare(&opts, &console),
        Command::Check => commands::cmd_check(&opts, &console),
        Command::Bound => commands::cmd_bound(&opts, &console),
        Command::Probe => commands::cmd_probe(&opts, &console),
    };
    match result {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            e.status()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { ExitStatus::Usage } else { ExitStatus::Success };
            let _ = e.print();
            return ExitCode::from(status.code() as u8);
        }
    };
    let status = panic::catch_unwind(|| dispatch(cli)).unwrap_or(ExitStatus::Numeric);
    ExitCode::from(status.code() as u8)
}
