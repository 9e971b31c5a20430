mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use rootfrac::Error;

use args::Cli;
use output::{DISAGREEMENT, INPUT, UNDECIDED};

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Undecided { .. } | Error::Range { .. } => UNDECIDED,
        Error::Internal(_) => DISAGREEMENT,
        Error::Input(_) | Error::Parse(_) | Error::Domain(_) | Error::Unsupported(_) => INPUT,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT } else { 0 });
        }
    };
    if cli.common.print_config {
        println!("{}", serde_json::to_string_pretty(&cli).expect("serializable"));
        return ExitCode::SUCCESS;
    }
    if let Some(j) = cli.common.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(INPUT);
        }
    }
    match commands::run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.render(cli.common.format).as_bytes());
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
