use std::process::ExitCode;

use shortvar_cli::{parse_config, run, CliError};

fn main() -> ExitCode {
    let code = match parse_config(std::env::args_os()).and_then(|cfg| run(&cfg)) {
        Ok(code) => code,
        Err(CliError::Help(text)) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("shortvar: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
