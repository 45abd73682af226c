//! `nli` binary. `NLI_THREADS` sets the size of the worker pool.

use std::io::Write;
use std::process::ExitCode;

use nli_cli::execute;

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("NLI_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("NLI_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    if let Err(msg) = configure_threads() {
        eprintln!("nli: usage error: {msg}");
        return ExitCode::from(2);
    }
    let run = execute(std::env::args_os());
    let mut stdout = std::io::stdout().lock();
    if stdout
        .write_all(run.stdout.as_bytes())
        .and_then(|_| stdout.flush())
        .is_err()
    {
        return ExitCode::from(3);
    }
    eprint!("{}", run.stderr);
    ExitCode::from(run.code)
}
