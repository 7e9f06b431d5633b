use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use spdc_lab::{execute, Cli, CliError, EXIT_CONFIG};
use spdc_lab_core::Execution;

/// Caps the worker pool from `SPDC_LAB_THREADS`; 1 runs everything on the
/// calling thread.
fn configure_threads() -> Result<Execution, CliError> {
    let Ok(raw) = std::env::var("SPDC_LAB_THREADS") else {
        return Ok(Execution::default());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("SPDC_LAB_THREADS must be a positive integer (got `{raw}`)")))?;
    if n == 1 {
        return Ok(Execution::Sequential);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Execution::Parallel)
}

fn run() -> Result<i32, CliError> {
    let cli = Cli::parse();
    let exec = configure_threads()?;
    let outcome = execute(&cli.command, exec)?;
    match &cli.command.common().out {
        Some(dir) => {
            let io = |e: std::io::Error| CliError::Usage(format!("cannot write to {}: {e}", dir.display()));
            std::fs::create_dir_all(dir).map_err(io)?;
            for f in &outcome.files {
                let path = dir.join(&f.name);
                std::fs::write(&path, &f.contents).map_err(io)?;
                eprintln!("wrote {}", path.display());
            }
        }
        None if outcome.files.len() > 1 => {
            return Err(CliError::Usage(format!(
                "this command writes {} files; pass --out DIR",
                outcome.files.len()
            )));
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            for f in &outcome.files {
                let _ = stdout.write_all(f.contents.as_bytes());
            }
        }
    }
    Ok(outcome.status)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let code = if matches!(e, CliError::Usage(_)) { EXIT_CONFIG } else { e.exit_code() };
            ExitCode::from(code as u8)
        }
    }
}
