use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(latticesq_experiments::cli::run_from(std::env::args_os()))
}
