use std::process::ExitCode;

fn main() -> ExitCode {
    riverine::cli::main_with(std::env::args_os())
}
