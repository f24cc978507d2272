use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Mutex;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use tfweyl::experiments::{run_counterexample, run_gaussian_ratio_sweep, run_stfta_check, SweepConfig, SCHEMA_VERSION};
use tfweyl::verification::{run_criterion, Outcome};

#[derive(Parser)]
#[command(name = "tfweyl", version, about = "Weyl product experiments on modulation spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output` in the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for verify-all.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Gaussian ratio sweep with log-log slope fits.
    SweepRatio,
    /// Norms of the divergence witness for growing truncation N.
    Counterexample,
    /// Closed-form STFT of a Wigner symbol against quadrature.
    StftCheck,
    /// Runs the ten acceptance checks; exits non-zero if any fails.
    VerifyAll,
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    config: &'a SweepConfig,
    result: T,
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_summary<T: Serialize>(dir: &Path, command: &str, config: &SweepConfig, result: T) -> Result<()> {
    let summary = Summary { schema_version: SCHEMA_VERSION, command, config, result };
    let path = dir.join(format!("{command}.json"));
    fs::write(&path, serde_json::to_string_pretty(&summary)?).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn load_config(cli: &Cli) -> Result<SweepConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            SweepConfig::from_toml(&text)?
        }
        None => SweepConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn verify_all(seed: u64, jobs: usize) -> Vec<Outcome> {
    let next = AtomicU32::new(1);
    let done = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, 10) {
            s.spawn(|| loop {
                let id = next.fetch_add(1, Ordering::Relaxed);
                if id > 10 {
                    break;
                }
                let outcome = run_criterion(id, seed);
                println!("{}", outcome.line());
                done.lock().unwrap().push(outcome);
            });
        }
    });
    let mut outcomes = done.into_inner().unwrap();
    outcomes.sort_by_key(|o| o.id);
    outcomes
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = load_config(cli)?;
    let dir = cli.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    match cli.command {
        Command::SweepRatio => {
            let out = run_gaussian_ratio_sweep(&cfg)?;
            write_csv(&dir.join("sweep_ratio.csv"), &out.rows)?;
            write_csv(&dir.join("sweep_slopes.csv"), &out.fits)?;
            if cfg.numeric.enabled {
                write_csv(&dir.join("sweep_numeric.csv"), &out.numeric_rows)?;
            }
            for f in &out.fits {
                println!(
                    "triple {}: case {:?}, slopes {:.4} / {:.4} (expected {:.4} / {:.4})",
                    f.triple, f.case, f.small_fitted, f.large_fitted, f.small_expected, f.large_expected
                );
            }
            write_summary(&dir, "sweep-ratio", &cfg, (&out.fits, &out.numeric_slopes))?;
            Ok(true)
        }
        Command::Counterexample => {
            let rows = run_counterexample(&cfg)?;
            write_csv(&dir.join("counterexample.csv"), &rows)?;
            for r in &rows {
                println!("N = {:>3}: M^(inf,q0) {:.4}, M^(p,q1) {:.4}", r.n, r.m_inf_q0, r.m_p_q1);
            }
            write_summary(&dir, "counterexample", &cfg, &rows)?;
            Ok(true)
        }
        Command::StftCheck => {
            let report = run_stfta_check(&cfg)?;
            println!("{} points: relative error {:.3e}", report.points, report.rel_error);
            write_summary(&dir, "stft-check", &cfg, &report)?;
            Ok(true)
        }
        Command::VerifyAll => {
            let outcomes = verify_all(cfg.seed, cli.jobs);
            let passed = outcomes.iter().all(|o| o.passed);
            write_csv(&dir.join("verify_all.csv"), &outcomes)?;
            write_summary(&dir, "verify-all", &cfg, &outcomes)?;
            Ok(passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
