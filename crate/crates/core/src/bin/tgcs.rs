use std::process::ExitCode;

fn main() -> ExitCode {
    tgcs::cli::main_with_args(std::env::args_os())
}
