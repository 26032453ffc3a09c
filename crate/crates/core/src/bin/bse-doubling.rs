use std::process::ExitCode;

fn main() -> ExitCode {
    bse_doubling::cli::run_from(std::env::args_os())
}
