use std::process::ExitCode;

fn main() -> ExitCode {
    densray_cli::run(std::env::args_os())
}
