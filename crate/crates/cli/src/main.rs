use std::process::ExitCode;

use clap::Parser;

mod args;
mod config;
mod json;
mod run;

#[derive(serde::Serialize)]
struct ErrorOut<'a> {
    error: &'a str,
    message: String,
    exit_code: u8,
}

fn fail(kind: &str, message: String, code: u8) -> ExitCode {
    eprintln!("mpgreen: {kind}: {message}");
    println!(
        "{}",
        json::to_string(&ErrorOut {
            error: kind,
            message,
            exit_code: code
        })
    );
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(m) => return fail("input error", m, run::EXIT_INPUT),
    };
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            return fail(
                "input error",
                e.to_string().trim_end().to_string(),
                run::EXIT_INPUT,
            )
        }
    };
    match run::run(cli.command) {
        Ok(out) => {
            println!("{}", out.stdout);
            ExitCode::from(out.code)
        }
        Err(e) => fail(e.kind(), e.to_string(), e.exit_code()),
    }
}
