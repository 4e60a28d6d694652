use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use sheetarena_cli::args::{Cli, Command};
use sheetarena_cli::commands;
use sheetarena_cli::config::EnvConfig;

fn run(cli: Cli) -> anyhow::Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut err = std::io::stderr();
    match &cli.command {
        Command::Features(a) => commands::features(a, &mut out, &mut err),
        Command::Fit(a) => commands::fit(a, EnvConfig::from_process()?, &mut out, &mut err),
        Command::Simulate(a) => commands::simulate(a, EnvConfig::from_process()?, &mut out),
        Command::Serve(a) => commands::serve(a, EnvConfig::from_process()?),
        Command::Report(a) => commands::report(a, &mut out),
    }?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(sheetarena_cli::exit_code(&e))
        }
    }
}
