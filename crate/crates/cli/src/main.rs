//! Batch front end for Gaussian Gabor frame numerics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod selftest;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::json;

use commands::Status;
use config::{check_frame_densities, densities, ConfigError, Flags, Format};
use output::Table;

#[derive(Debug, Parser)]
#[command(name = "gabor-crit", version, about = "Gabor frame bounds of the Gaussian near critical density")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Frame-bound estimates for given densities
    Bounds(Flags),
    /// Frame-bound estimates over a density range (default 0.6..0.95, 7 intervals)
    Sweep(Flags),
    /// Extremal-function construction (a >= 0.98)
    Extremal(Flags),
    /// Canonical dual window diagnostics
    Dual(Flags),
    /// Weierstrass sigma growth band and truncation stability
    SigmaCheck(Flags),
    /// Invariant suites of every module at small sizes
    Selftest(Flags),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Bounds(_) => "bounds",
            Command::Sweep(_) => "sweep",
            Command::Extremal(_) => "extremal",
            Command::Dual(_) => "dual",
            Command::SigmaCheck(_) => "sigma-check",
            Command::Selftest(_) => "selftest",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Command::Bounds(f)
            | Command::Sweep(f)
            | Command::Extremal(f)
            | Command::Dual(f)
            | Command::SigmaCheck(f)
            | Command::Selftest(f) => f,
        }
    }
}

const SWEEP_RANGE: (f64, f64, usize) = (0.6, 0.95, 7);
const EXTREMAL_DEFAULT: [f64; 3] = [0.99, 0.995, 0.999];

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(Status::Config as u8),
            };
        }
    };
    match run(&cli.command) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Status::Config as u8)
        }
    }
}

fn run(command: &Command) -> Result<Status, ConfigError> {
    let flags = config::load(command.flags())?;
    if flags.workers == Some(0) {
        return Err(ConfigError("--workers must be at least 1".into()));
    }
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = flags.workers {
            b = b.num_threads(w);
        }
        b.build().map_err(|e| ConfigError(format!("cannot start worker pool: {e}")))?
    };

    if let Command::Selftest(_) = command {
        return Ok(pool.install(|| run_selftest(&flags)));
    }

    let a = match command {
        Command::Bounds(_) | Command::Dual(_) => densities(&flags, None)?,
        Command::Sweep(_) => densities(&flags, Some(SWEEP_RANGE))?,
        Command::Extremal(_) => {
            if flags.a.is_empty() && flags.a_min.is_none() && flags.a_max.is_none() {
                EXTREMAL_DEFAULT.to_vec()
            } else {
                densities(&flags, None)?
            }
        }
        Command::SigmaCheck(_) => {
            if flags.a.is_empty() && flags.a_min.is_none() && flags.a_max.is_none() {
                vec![1.0]
            } else {
                densities(&flags, None)?
            }
        }
        Command::Selftest(_) => unreachable!(),
    };
    match command {
        Command::Bounds(_) | Command::Sweep(_) | Command::Dual(_) => check_frame_densities(&a)?,
        _ => {
            if let Some(x) = a.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
                return Err(ConfigError(format!("density a = {x} must be positive")));
            }
        }
    }
    if flags.steps == Some(0) {
        return Err(ConfigError("--steps must be at least 1".into()));
    }

    let start = Instant::now();
    let (table, status) = pool.install(|| match command {
        Command::Bounds(_) | Command::Sweep(_) => Ok(commands::bounds(&a, &flags)),
        Command::Extremal(_) => Ok(commands::extremal(&a, &flags)),
        Command::Dual(_) => commands::dual(&a, &flags),
        Command::SigmaCheck(_) => Ok(commands::sigma_check(&a, &flags)),
        Command::Selftest(_) => unreachable!(),
    })?;
    let metadata = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command.name(),
        "config": echo(&flags, &a),
        "workers": pool.current_num_threads(),
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    write_table(&table, &flags, metadata)?;
    for row in &table.rows {
        if let Some(output::Cell::Text(msg)) = row.last() {
            eprintln!("row error: {msg}");
        }
    }
    Ok(status)
}

fn echo(flags: &Flags, a: &[f64]) -> serde_json::Value {
    json!({
        "a": a,
        "n": flags.n,
        "rho": flags.rho,
        "c0": flags.c0,
        "eps": flags.eps,
        "grid": flags.grid,
        "margin": flags.margin,
        "test_radius": flags.test_radius,
        "seed": flags.seed.unwrap_or(0),
        "format": flags.format.unwrap_or(Format::Csv),
        "out": flags.out,
        "config": flags.config,
    })
}

fn write_table(table: &Table, flags: &Flags, metadata: serde_json::Value) -> Result<(), ConfigError> {
    let format = flags.format.unwrap_or(Format::Csv);
    let io_err = |e: io::Error| ConfigError(format!("cannot write output: {e}"));
    match &flags.out {
        Some(path) => {
            let file = File::create(path).map_err(io_err)?;
            let mut w = BufWriter::new(file);
            output::emit(table, format, metadata, &mut w).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            output::emit(table, format, metadata, &mut w).map_err(io_err)
        }
    }
}

fn run_selftest(flags: &Flags) -> Status {
    let cfg = selftest::SelftestConfig {
        c0: flags.c0.unwrap_or(gabor_crit::bargmann::SAMPLING_PREFACTOR),
        seed: flags.seed.unwrap_or(0),
        quick: flags.quick,
    };
    let start = Instant::now();
    let results = selftest::run(&cfg);
    let failed = results.iter().filter(|r| !r.passed).count();
    for r in &results {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    println!(
        "selftest: {} passed, {failed} failed in {:.1} s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        Status::Ok
    } else {
        Status::Validation
    }
}
