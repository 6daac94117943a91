//! `dszog` experiment runner.
//!
//! Exit codes: 0 success, 1 configuration or data error (nothing ran),
//! 2 failure while running or writing results. Results are written to a
//! staging directory next to the output directory and moved into place only
//! when every run finished, so a failed experiment leaves nothing behind.

mod config;
mod experiment;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::Parser;

use config::ExperimentConfig;

#[derive(Parser, Debug)]
#[command(name = "dszog", version, about = "Run constrained black-box optimization experiments")]
struct Args {
    /// Experiment configuration (key=value lines).
    config: PathBuf,
    /// Output directory; overrides `out_dir` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed; repeat r runs with seed + r. Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Validate the configuration and data, then exit without running.
    #[arg(long)]
    dry_run: bool,
    /// Log every trace row to stderr.
    #[arg(long)]
    verbose: bool,
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("runtime error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(args: &Args) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::load(&args.config).map_err(Failure::Config)?;
    if let Some(s) = args.seed {
        cfg.base_seed = s;
    }
    let prepared = experiment::prepare(&cfg).map_err(Failure::Config)?;
    if args.dry_run {
        let plan = experiment::plan(&cfg, &prepared).map_err(Failure::Config)?;
        println!("ok: {plan}");
        return Ok(());
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .ok_or_else(|| Failure::Config(anyhow!("out_dir: missing (set it in the configuration or pass --out)")))?;
    check_out_dir(&out).map_err(Failure::Config)?;

    let staging = staging_dir(&out).map_err(Failure::Runtime)?;
    let result = experiment::run(&cfg, &prepared, &staging, args.verbose).and_then(|()| publish(&staging, &out));
    if let Err(e) = result {
        let _ = fs::remove_dir_all(&staging);
        return Err(Failure::Runtime(e));
    }
    println!("results in {}", out.display());
    Ok(())
}

fn check_out_dir(out: &Path) -> Result<()> {
    if out.exists() {
        let mut entries = fs::read_dir(out).with_context(|| format!("out_dir: cannot read {}", out.display()))?;
        if entries.next().is_some() {
            bail!("out_dir: {} exists and is not empty", out.display());
        }
    }
    Ok(())
}

fn staging_dir(out: &Path) -> Result<PathBuf> {
    let name = out.file_name().ok_or_else(|| anyhow!("out_dir: {} has no final component", out.display()))?;
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).with_context(|| format!("creating {}", parent.display()))?;
    let staging = parent.join(format!(".{}.partial-{}", name.to_string_lossy(), std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging).with_context(|| format!("clearing {}", staging.display()))?;
    }
    fs::create_dir(&staging).with_context(|| format!("creating {}", staging.display()))?;
    Ok(staging)
}

fn publish(staging: &Path, out: &Path) -> Result<()> {
    if out.exists() {
        fs::remove_dir(out).with_context(|| format!("replacing empty {}", out.display()))?;
    }
    fs::rename(staging, out).with_context(|| format!("moving results to {}", out.display()))
}
