//! Thin command-line front end over the library's `run` module.
//!
//! Exit codes: 0 success, 1 bad request (usage, config, model, I/O),
//! 2 solver refusal (the request was well-posed but its answer would not be
//! numerically meaningful).

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rspt::config::RunConfig;
use rspt::run::{cmd_oracle, cmd_solve, cmd_sweep, RunContext};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rspt",
    version,
    about = "Perturbation expansions for band-matrix operator families"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand a state and evaluate the series at the target couplings.
    Solve(CommonArgs),
    /// Compare partial sums against direct solves over the target grid.
    Sweep(CommonArgs),
    /// Verify series coefficients and convergence against independent checks.
    Oracle(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Suppress the stdout summary; files are still written.
    #[arg(long)]
    quiet: bool,
}

fn run(command: &Command) -> rspt::Result<()> {
    let args = match command {
        Command::Solve(a) | Command::Sweep(a) | Command::Oracle(a) => a,
    };
    let raw_config = std::fs::read(&args.config).map_err(|e| {
        rspt::Error::Config(format!("cannot read {}: {e}", args.config.display()))
    })?;
    let text = std::str::from_utf8(&raw_config)
        .map_err(|e| rspt::Error::Config(format!("{}: {e}", args.config.display())))?;
    let config = RunConfig::from_json(text)?;
    let ctx = RunContext {
        raw_config,
        base_dir: args
            .config
            .parent()
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".")),
        out_dir: args.out.clone(),
        quiet: args.quiet,
    };
    let written = match command {
        Command::Solve(_) => cmd_solve(&config, &ctx)?,
        Command::Sweep(_) => cmd_sweep(&config, &ctx)?,
        Command::Oracle(_) => cmd_oracle(&config, &ctx)?,
    };
    for path in written {
        ctx.say(&format!("wrote {}", path.display()));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
