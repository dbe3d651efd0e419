/// `println!` that ignores a closed stdout instead of panicking.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::config::{Failure, RunConfig};

fn run(cli: &Cli) -> Result<(), Failure> {
    let args = cli.command.args();
    if args.seed_free {
        return Err(Failure::usage(
            "--seed-free is reserved: the model is deterministic and takes no seed",
        ));
    }
    let cfg = RunConfig::from_args(args)?;
    if args.dump_config {
        let text = serde_json::to_string_pretty(&cfg).map_err(anyhow::Error::from)?;
        say!("{text}");
        return Ok(());
    }
    match &cli.command {
        Command::Simulate(_) => commands::simulate(&cfg),
        Command::Optimal(_) => commands::optimal(&cfg),
        Command::Compare(_) => commands::compare_cmd(&cfg),
        Command::Sweep(_) => commands::sweep_cmd(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lbsim {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
