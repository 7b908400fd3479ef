use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mms_lab::{exit_code, load_config, run, SUBCOMMANDS};
use serde_json::json;

/// Finite metric measure space experiments.
#[derive(Parser, Debug)]
#[command(name = "mms-lab", version)]
struct Cli {
    /// One of: space-gen, bvy, seminorm, orlicz, varexp, anisotropic, covering,
    /// nonlocal-apply, nonlocal-solve, poincare, equivalence, kfunc, interp,
    /// bbm, sharpness, stability.
    subcommand: String,
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: `out/<subcommand>`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn fail(kind: &str, code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!(
        "{}",
        json!({ "error": kind, "exit_code": code, "message": message.to_string() })
    );
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            return fail(
                "usage",
                2,
                e.to_string().lines().next().unwrap_or("invalid arguments"),
            )
        }
    };
    if !SUBCOMMANDS.contains(&cli.subcommand.as_str()) {
        return fail(
            "unknown-subcommand",
            5,
            format!("unknown subcommand `{}`", cli.subcommand),
        );
    }
    if cli.threads == Some(0) {
        return fail("usage", 2, "--threads must be at least 1");
    }
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => return fail("runtime", 4, e),
    };
    let outcome = pool.install(|| {
        let loaded = load_config(&cli.config)?;
        run(&cli.subcommand, &loaded, cli.seed)
    });
    let report = match outcome {
        Ok(r) => r,
        Err(e) => {
            let code = exit_code(&e);
            let kind = match code {
                3 => "numerical",
                4 => "io",
                _ => "validation",
            };
            return fail(kind, code as u8, e);
        }
    };
    let dir = cli
        .out
        .unwrap_or_else(|| PathBuf::from("out").join(&cli.subcommand));
    if let Err(e) = report.write(&dir) {
        return fail("io", exit_code(&e) as u8, e);
    }
    match &report.numerical_failure {
        Some(msg) => fail("numerical", 3, msg),
        None => {
            println!("{}", dir.join("summary.json").display());
            ExitCode::SUCCESS
        }
    }
}
