use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use geophase::cli::{run_subcommand, Subcommand};
use geophase::config::load_config;
use geophase::Error;

/// Geometric phase of a three-level atom in an engineered cavity reservoir.
#[derive(Parser, Debug)]
#[command(name = "geophase", version)]
struct Args {
    /// derive | cycle | ramsey | sweep | validate | analytic
    subcommand: String,
    /// Config file, or `cs_defaults` for the shipped Cs parameter set.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's output.dir, else ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and fringe scans.
    #[arg(long)]
    jobs: Option<usize>,
    /// Accepted for compatibility; runs are always deterministic.
    #[arg(long)]
    seedless_deterministic: bool,
}

fn fail(e: &Error) -> ExitCode {
    let report = serde_json::json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code(),
    });
    eprintln!("{report}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let run = || -> geophase::Result<Vec<PathBuf>> {
        let cmd: Subcommand = args.subcommand.parse()?;
        let cfg = load_config(&args.config)?;
        for w in &cfg.warnings {
            eprintln!("warning: {w}");
        }
        run_subcommand(cmd, &cfg, args.out.as_deref(), args.jobs)
    };
    match run() {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
