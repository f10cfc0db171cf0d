use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use zkmip::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match zkmip::run(&cli) {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(report.text.as_bytes()).and_then(|()| out.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(report.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
