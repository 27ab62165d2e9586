use std::process::ExitCode;

use clap::Parser;
use hdcov_cli::{run, Cli, THREADS_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env_threads = std::env::var(THREADS_ENV).ok();
    let code = run(&cli, env_threads.as_deref(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code)
}
