use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use horolab::{Cli, LabError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = cli.opts.resolve().and_then(|opts| {
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        horolab::run(cli.command, &opts, &mut out)?;
        out.flush().map_err(LabError::from)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("horolab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
