use std::process::ExitCode;

fn main() -> ExitCode {
    cavity_zeno::cli::run(std::env::args_os())
}
