use std::process::ExitCode;

fn main() -> ExitCode {
    molgraf::cli::run(std::env::args_os())
}
