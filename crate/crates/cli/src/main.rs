use std::process::ExitCode;

use clap::Parser;
use intcon_cli::{run, CliConfig, EXIT_USAGE};

fn main() -> ExitCode {
    let config = match CliConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let code = run(
        &config,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code as u8)
}
