use std::process::ExitCode;

fn main() -> ExitCode {
    envlab::cli::run(std::env::args_os())
}
