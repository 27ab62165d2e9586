//! Command-line front end for `hdcov`.

pub mod commands;
pub mod error;
pub mod io;

use std::io::Write;

pub use commands::{execute, resolve_threads, Cli, Output, THREADS_ENV};
pub use error::{CliError, CliResult};

/// Runs `cli`, writing results to `stdout` (or the `--out` file) and notes to
/// `stderr`. Returns the process exit code.
pub fn run(cli: &Cli, env_threads: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    match run_inner(cli, env_threads, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn run_inner(cli: &Cli, env_threads: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let threads = resolve_threads(cli.threads, env_threads)?;
    let output = execute(cli, threads)?;
    for line in &output.stderr {
        let _ = writeln!(stderr, "{line}");
    }
    match &output.out {
        Some(path) => std::fs::write(path, &output.stdout).map_err(|source| CliError::Io { path: path.clone(), source })?,
        None => stdout
            .write_all(output.stdout.as_bytes())
            .map_err(|e| CliError::Internal(format!("cannot write output: {e}")))?,
    }
    match output.failure {
        Some(name) => Err(CliError::Validation(name)),
        None => Ok(()),
    }
}
