use std::process::ExitCode;

use clap::Parser;
use collatz_octave::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(result) => {
            for note in &result.notes {
                eprintln!("{note}");
            }
            for path in &result.artifacts {
                eprintln!("wrote {}", path.display());
            }
            ExitCode::from(result.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
