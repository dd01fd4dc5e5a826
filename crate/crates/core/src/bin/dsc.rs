//! `dsc <command> --config <file> [--out <dir>] [--seed <u64>] [--set key=value]...`
//!
//! Exit status: 0 on success, 1 on usage or configuration errors, 2 when a
//! numerical iteration fails or stops short of its tolerance.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dsc::cli::{parse_config, run, Command};
use dsc::DscError;

#[derive(Parser, Debug)]
#[command(name = "dsc", version, about = "Discrete symbol calculus driver")]
struct Args {
    /// One of build-symbol, compose, invert, sqrt, exp, moyal, apply,
    /// oracle-check, helmholtz, polarize, migrate.
    command: String,
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// RNG seed for random test functions; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Extra `key=value` assignments applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let Some(command) = Command::from_name(&args.command) else {
        let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
        eprintln!("dsc: unknown command `{}` (expected one of {})", args.command, names.join(", "));
        return ExitCode::from(1);
    };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("dsc: cannot read {}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    let mut overrides = args.set.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("seed={seed}"));
    }
    let base = args.config.parent().map(PathBuf::from).unwrap_or_default();
    let cfg = match parse_config(&text, &overrides, &base) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("dsc: {e}");
            return ExitCode::from(1);
        }
    };
    match run(command, &cfg, &args.out) {
        Ok(outcome) => {
            for (k, v) in &outcome.summary {
                println!("{k}={v}");
            }
            for (stage, secs) in &outcome.timings {
                println!("time_{stage}={secs:.3}s");
            }
            match outcome.unconverged {
                Some(msg) => {
                    eprintln!("dsc: {msg}");
                    ExitCode::from(2)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("dsc: {e}");
            match e {
                DscError::Numerical(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
