use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(rigfix::cli::run(std::env::args()) as u8)
}
