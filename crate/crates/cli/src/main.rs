mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::Parser;
use sha2::{Digest, Sha256};

use commands::{Failure, Run};
use output::{Manifest, OutputDir};

/// Fractional seminorms, nonlocal solves and regularity diagnostics driven by a TOML config.
#[derive(Debug, Parser)]
#[command(name = "nonlocal", version)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for sampled checks; overrides `analysis.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the library's parallel loops.
    #[arg(long)]
    threads: Option<usize>,
    /// Verification tolerance; overrides `analysis.tolerance`.
    #[arg(long)]
    tolerance: Option<f64>,
}

fn run(cli: &Cli) -> Result<Vec<String>, Failure> {
    let loaded = config::load(&cli.config).map_err(Failure::Config)?;
    let cfg = &loaded.config;
    let tolerance = cli.tolerance.unwrap_or(cfg.tolerance());
    if !(tolerance > 0.0) {
        return Err(Failure::Config(anyhow!("tolerance must be positive, got {tolerance}")));
    }
    let seed = cli.seed.unwrap_or(cfg.seed());
    let threads = match cli.threads {
        Some(0) => return Err(Failure::Config(anyhow!("--threads must be at least 1"))),
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Failure::Config(e.into()))?;
            n
        }
        None => rayon::current_num_threads(),
    };
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.directory.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut out = OutputDir::create(&dir).map_err(Failure::Io)?;

    let mut job = Run {
        cfg,
        seed,
        tolerance,
        out: &mut out,
        violations: Vec::new(),
    };
    job.execute()?;
    let violations = job.violations;

    let mut m = Manifest::default();
    m.set("command", cfg.command.name());
    m.set("config_sha256", hex::encode(Sha256::digest(loaded.text.as_bytes())));
    m.set("seed", seed);
    m.set("tolerance", tolerance);
    m.set("threads", threads);
    m.set("version", env!("CARGO_PKG_VERSION"));
    m.set("files", out.files().join(","));
    m.set("violations", violations.len());
    out.write_bytes("manifest.txt", m.render().as_bytes()).map_err(Failure::Io)?;
    Ok(violations)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(v) if v.is_empty() => ExitCode::SUCCESS,
        Ok(v) => {
            for msg in v {
                eprintln!("verification failed: {msg}");
            }
            ExitCode::from(4)
        }
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
