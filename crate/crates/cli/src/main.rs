use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use phinabla_cli::{error_json, run, Cli};

fn emit(out: &phinabla_cli::Outcome, json: bool) {
    let mut stdout = std::io::stdout().lock();
    if json {
        let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&out.json).expect("serializable"));
    } else {
        let _ = write!(stdout, "{}", out.text);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            emit(&out, cli.json);
            ExitCode::from(out.exit)
        }
        Err(f) => {
            if let Some(p) = &f.partial {
                emit(p, cli.json);
            }
            eprintln!("{}", error_json(&f.error));
            ExitCode::from(phinabla_cli::exit_code(&f.error))
        }
    }
}
