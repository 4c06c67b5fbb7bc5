//! `franks` — run verification and realization experiments from flat
//! key=value configs.
//!
//! Usage:
//!   franks run <config> [--key value ...]
//!   franks list
//!
//! Exit codes: 0 all checks pass; 1 some checks fail; 2 malformed
//! configuration; 3 library error (name on stderr). The env var
//! FRANKS_THREADS caps worker parallelism.

use std::path::Path;
use std::process::ExitCode;

use franks_cli::config::Config;
use franks_cli::report::{all_pass, write_csv};
use franks_cli::{experiments, CliError};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.first().map(|s| s.as_str()) {
        Some("list") => {
            print!("{}", experiments::catalog());
            ExitCode::SUCCESS
        }
        Some("run") => {
            if args.len() < 2 {
                eprintln!("ConfigError: usage: franks run <config> [--key value ...]");
                return ExitCode::from(2);
            }
            run(&args[1], &args[2..])
        }
        _ => {
            eprintln!("usage: franks run <config> [--key value ...] | franks list");
            ExitCode::from(2)
        }
    }
}

fn run(config_path: &str, overrides: &[String]) -> ExitCode {
    if let Ok(threads) = std::env::var("FRANKS_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }

    let mut cfg = match Config::from_file(Path::new(config_path)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ConfigError: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = cfg.apply_overrides(overrides) {
        eprintln!("ConfigError: {e}");
        return ExitCode::from(2);
    }

    let started = std::time::Instant::now();
    let rows = match experiments::run(&cfg) {
        Ok(rows) => rows,
        Err(CliError::Config(e)) => {
            eprintln!("ConfigError: {e}");
            return ExitCode::from(2);
        }
        Err(CliError::Lib(e)) => {
            eprintln!("{}: {e}", e.name());
            return ExitCode::from(3);
        }
    };

    // Assemble the full report before touching the output path, so failed
    // runs never leave partial CSVs behind.
    let mut csv = Vec::new();
    if let Err(e) = write_csv(&rows, &mut csv) {
        eprintln!("ConfigError: cannot assemble report: {e}");
        return ExitCode::from(2);
    }
    match cfg.get("out") {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &csv) {
                eprintln!("ConfigError: cannot write {path}: {e}");
                return ExitCode::from(2);
            }
        }
        None => print!("{}", String::from_utf8_lossy(&csv)),
    }

    let passed = rows.iter().filter(|r| r.pass).count();
    eprintln!(
        "{} rows, {passed} passed, {:.2}s",
        rows.len(),
        started.elapsed().as_secs_f64()
    );
    if all_pass(&rows) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
