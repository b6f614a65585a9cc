use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(opalg::cli::run(std::env::args()))
}
