//! `capflow`: run the capillary flow or its verification suites from a TOML config.
//!
//! Exit codes: 0 converged / verification passed, 2 time limit reached,
//! 1 on any error or failed invariant.

use anyhow::{Context, Result};
use capflow_core::config::RunConfig;
use capflow_core::error::FlowError;
use capflow_core::flow::{evolve, Termination};
use capflow_core::io::{summarize, write_summary, write_trajectory, SUMMARY_FILE};
use capflow_core::verify::run_verification;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

/// Environment variable overriding `[output] dir`.
const OUTPUT_DIR_ENV: &str = "CAPFLOW_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "capflow", version, about = "Capillary flow in hyperbolic and spherical geodesic balls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured initial profile and write snapshots and a summary.
    Evolve { config: PathBuf },
    /// Run the static-cap, Minkowski and curvature residual suites.
    Verify { config: PathBuf },
}

fn output_dir(config: &RunConfig) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| config.output.dir.clone())
}

fn load(path: &Path) -> Result<(RunConfig, capflow_core::FlowConfig)> {
    let config = RunConfig::from_path(path).with_context(|| format!("reading config {}", path.display()))?;
    let flow = config
        .flow_config()
        .with_context(|| format!("validating config {}", path.display()))?;
    if !flow.sf.satisfies_angle_restriction() {
        eprintln!(
            "warning: |cos theta| = {:.6} is outside the angle restriction (3n+1)/(5n-1) = {:.6}",
            flow.sf.theta().cos().abs(),
            capflow_core::spaceform::angle_bound(flow.sf.dim())
        );
    }
    Ok((config, flow))
}

fn run_evolve(path: &Path) -> Result<ExitCode> {
    let (config, flow) = load(path)?;
    let dir = output_dir(&config);
    let start = Instant::now();
    let traj = match evolve(&flow) {
        Ok(t) => t,
        Err(e @ FlowError::InvariantViolation { .. }) => {
            return Err(anyhow::Error::new(e).context("evolution stopped"));
        }
        Err(e) => return Err(anyhow::Error::new(e).context(format!("evolution failed ({})", Termination::NumericalFailure.as_str()))),
    };
    let wall = start.elapsed().as_secs_f64();
    write_trajectory(&dir, &traj).with_context(|| format!("writing output to {}", dir.display()))?;
    let summary = summarize(&config, &traj, wall);
    write_summary(&dir.join(SUMMARY_FILE), &summary)?;
    println!(
        "{}: {} steps, t = {:.6}, max|G| = {:.3e}, wall {:.2}s",
        summary.termination, summary.steps, summary.t_final, summary.final_record.max_abs_g, wall
    );
    if let Some(report) = &summary.isoperimetric {
        print!("{}", report.table());
    }
    let failed: Vec<&str> = summary
        .invariants
        .iter()
        .filter(|i| !i.pass && traj.termination == Termination::Converged)
        .map(|i| i.name.as_str())
        .collect();
    if !failed.is_empty() {
        for inv in summary.invariants.iter().filter(|i| !i.pass) {
            eprintln!("error: invariant violated: {}: {}", inv.name, inv.detail);
        }
        return Ok(ExitCode::from(1));
    }
    Ok(match traj.termination {
        Termination::Converged => ExitCode::SUCCESS,
        Termination::TimeLimit => ExitCode::from(2),
        Termination::NumericalFailure => ExitCode::from(1),
    })
}

fn run_verify(path: &Path) -> Result<ExitCode> {
    let (config, flow) = load(path)?;
    let dir = output_dir(&config);
    let report = run_verification(&flow)?;
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let out = dir.join("verify.json");
    std::fs::write(&out, serde_json::to_string_pretty(&report)?).with_context(|| format!("writing {}", out.display()))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for c in &report.static_caps {
        println!(
            "static cap rhat={:.4}: max|G| = {:.3e} (threshold {:.3e}) rate {} {}",
            c.rhat,
            c.residual,
            c.threshold,
            serde_json::to_string(&c.rate)?,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    for m in &report.minkowski {
        println!(
            "minkowski {} k={}: residual {:.3e} rate {} {}",
            m.profile,
            m.k,
            m.residual,
            serde_json::to_string(&m.rate)?,
            if m.pass { "PASS" } else { "FAIL" }
        );
    }
    let cc = &report.curvature_cross_check;
    println!(
        "curvature cross-check: {:.3e} (tolerance {:.0e}) {}",
        cc.max_relative_difference,
        cc.tolerance,
        if cc.pass { "PASS" } else { "FAIL" }
    );
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Evolve { config } => run_evolve(config),
        Command::Verify { config } => run_verify(config),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
