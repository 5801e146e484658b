mod args;
mod commands;
mod output;

use args::{Cli, Command};
use clap::error::ErrorKind;
use clap::Parser;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful outcomes; everything else is a
            // usage error
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let outcome = match &cli.command {
        Command::Fit(a) => commands::fit::run(a).map(|()| 0),
        Command::Bench(a) => commands::bench::run(a).map(|()| 0),
        Command::Forget(a) => commands::forget::run(a).map(|()| 0),
        Command::Gradcheck(a) => commands::gradcheck::run(a),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}

/// 1 = the request was invalid (usage), 2 = the computation failed.
fn exit_code(e: &relukan::Error) -> i32 {
    use relukan::Error;
    match e {
        Error::Param(_) | Error::Dim { .. } | Error::Parse(_) => 1,
        Error::NonFinite { .. }
        | Error::DegenerateBasis { .. }
        | Error::Contract(_)
        | Error::Io(_) => 2,
    }
}
