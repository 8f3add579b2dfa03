use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use ensbf::harness::{
    config_hash, convergence_sweep, generate, load_or_default, posterior_clouds, posterior_test,
    run_experiment, verify_identity, write_experiment, write_json, write_points_csv,
    write_sweep_csv, ExperimentConfig, GenerateConfig, IdentityConfig, PosteriorTestConfig,
    SweepConfig,
};

/// Ensemble Schrödinger-bridge filtering experiments.
#[derive(Parser)]
#[command(name = "ensbf", version)]
struct Cli {
    /// JSON configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bridge generation from a dataset, written as CSV points.
    Generate,
    /// Run a filtering experiment.
    Filter,
    /// Convergence sweep over the Euler steps or the ensemble size.
    Sweep,
    /// One-step comparison against the exact four-mode posterior.
    PosteriorTest,
    /// Grid check of the score/control identity.
    VerifyIdentity,
}

fn out_dir(cli: &Cli, configured: Option<&str>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| configured.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn run(cli: &Cli) -> Result<bool> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Generate => {
            let mut cfg: GenerateConfig = load_or_default(config)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let dir = out_dir(cli, None);
            let out = generate(&cfg)?;
            write_points_csv(&dir.join("samples.csv"), &out.samples)?;
            write_points_csv(&dir.join("data.csv"), &out.data)?;
            write_json(
                &dir.join("generate.json"),
                &serde_json::json!({
                    "config": cfg,
                    "config_hash": out.config_hash,
                    "energy_distance_to_fresh_data": out.energy_to_fresh_data,
                }),
            )?;
            println!(
                "{} samples written to {}; energy distance to fresh data {:.5}",
                out.samples.len(),
                dir.display(),
                out.energy_to_fresh_data
            );
            Ok(true)
        }
        Command::Filter => {
            let mut cfg: ExperimentConfig = load_or_default(config)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let dir = out_dir(cli, cfg.out_dir.as_deref());
            let result = run_experiment(&cfg)?;
            write_experiment(&result, &dir)?;
            for s in result.summaries() {
                println!(
                    "{:>10}  rmse {:.4} ± {:.4}  terminal smoothed {:.4} ± {:.4}",
                    s.label,
                    s.rmse_after_burn_in,
                    s.rmse_after_burn_in_stderr,
                    s.terminal_smoothed_rmse,
                    s.terminal_smoothed_rmse_stderr
                );
            }
            for f in &result.failures {
                eprintln!("repeat {} failed: {}", f.repeat, f.message);
            }
            Ok(result.succeeded())
        }
        Command::Sweep => {
            let mut cfg: SweepConfig = load_or_default(config)?;
            if let Some(s) = cli.seed {
                cfg.experiment.seed = s;
            }
            cfg.experiment.validate()?;
            let dir = out_dir(cli, cfg.experiment.out_dir.as_deref());
            let table = convergence_sweep(&cfg)?;
            write_sweep_csv(&dir.join("sweep.csv"), &table)?;
            write_json(
                &dir.join("sweep.json"),
                &serde_json::json!({ "config": cfg, "config_hash": config_hash(&cfg)?, "table": table }),
            )?;
            for r in &table.rows {
                println!(
                    "{:>10}  {:>6}  {:.4} ± {:.4}",
                    r.filter, r.axis_value, r.mean, r.stderr
                );
            }
            for (v, f) in &table.failures {
                eprintln!("value {v}, repeat {} failed: {}", f.repeat, f.message);
            }
            Ok(table.failures.is_empty())
        }
        Command::PosteriorTest => {
            let mut cfg: PosteriorTestConfig = load_or_default(config)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let dir = out_dir(cli, None);
            let report = posterior_test(&cfg)?;
            write_json(&dir.join("posterior_test.json"), &report)?;
            let clouds = posterior_clouds(&cfg, 0)?;
            write_points_csv(&dir.join("prior.csv"), &clouds.prior)?;
            write_points_csv(&dir.join("ensbf.csv"), &clouds.ensbf)?;
            write_points_csv(&dir.join("pf.csv"), &clouds.pf)?;
            write_points_csv(&dir.join("exact.csv"), &clouds.exact)?;
            if let Some(e) = &clouds.enkf {
                write_points_csv(&dir.join("enkf.csv"), e)?;
            }
            for r in &report.repeats {
                println!(
                    "repeat {:>2}  ensbf {:.5}  pf {:.5}  pf duplicates {:.3}",
                    r.repeat, r.ensbf, r.pf, r.pf_duplicate_fraction
                );
            }
            println!(
                "ensbf closer in {}/{} repeats",
                report.ensbf_wins,
                report.repeats.len()
            );
            Ok(true)
        }
        Command::VerifyIdentity => {
            let cfg: IdentityConfig = load_or_default(config)?;
            let dir = out_dir(cli, None);
            let report = verify_identity(&cfg)?;
            write_json(&dir.join("identity.json"), &report)?;
            println!(
                "max error {:.3e} over {} points (tolerance {:.1e}): {}",
                report.max_abs_error,
                report.grid_points,
                cfg.tolerance,
                if report.pass { "pass" } else { "fail" }
            );
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli).with_context(|| describe(cli.config.as_deref())) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn describe(config: Option<&Path>) -> String {
    match config {
        Some(p) => format!("running with {}", p.display()),
        None => "running with the built-in defaults".into(),
    }
}
