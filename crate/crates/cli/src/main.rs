use std::process::ExitCode;

use clap::Parser;
use penreg_cli::args::Args;
use penreg_cli::{run, CliError};

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("penreg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: Args) -> Result<(), CliError> {
    let cfg = args.into_config()?;
    let report = run(&cfg)?;
    report.write(cfg.output.path.as_deref(), cfg.output.format)
}
