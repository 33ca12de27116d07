//! Output formats: snapshot CSV, observables time series CSV and `summary.json`.
//!
//! Floats are written with 17 significant digits so values read back are
//! bit-identical.

use crate::config::RunConfig;
use crate::convergence::{fit_cap_against, isoperimetric_check, CapFit, IsoperimetricReport};
use crate::flow::{Enclosure, GradientDiagnostic, Snapshot, Trajectory};
use crate::observables::ObservableRecord;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Column names of a snapshot file.
pub const SNAPSHOT_COLUMNS: [&str; 6] = ["beta", "u", "rho", "G", "kappa_beta", "kappa_azimuthal"];
/// Column names of the observables time series.
pub const TIMESERIES_COLUMNS: [&str; 7] = ["t", "area", "wetting", "volume", "energy", "max_abs_G", "kappa_spread"];
/// File name of the observables time series.
pub const TIMESERIES_FILE: &str = "timeseries.csv";
/// File name of the run summary.
pub const SUMMARY_FILE: &str = "summary.json";
/// Top-level keys of `summary.json`.
pub const SUMMARY_KEYS: [&str; 15] = [
    "config",
    "termination",
    "steps",
    "wall_time_s",
    "t_final",
    "angle_restriction_satisfied",
    "initial",
    "final",
    "cap_fit",
    "isoperimetric",
    "enclosure",
    "gradient",
    "decay_rate",
    "invariants",
    "all_invariants_pass",
];

/// Relative volume drift allowed over a run.
pub const VOLUME_DRIFT_TOLERANCE: f64 = 1e-4;
/// Relative slack for energy increase between consecutive snapshots.
pub const ENERGY_STEP_SLACK: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv error on {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed value `{value}` in {path}")]
    Parse { path: String, value: String },
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// `snap_<step>.csv`
pub fn snapshot_file_name(step: usize) -> String {
    format!("snap_{step}.csv")
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> OutputError + '_ {
    move |source| OutputError::Csv {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_snapshot(path: &Path, snap: &Snapshot, betas: &[f64]) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(SNAPSHOT_COLUMNS).map_err(csv_err(path))?;
    for (i, u) in snap.state.u().iter().enumerate() {
        let row = [betas[i], *u, u.exp(), snap.speed[i], snap.kappa_beta[i], snap.kappa_azimuthal[i]];
        w.write_record(row.iter().map(|v| fmt(*v))).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Columns of a snapshot file, in [`SNAPSHOT_COLUMNS`] order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SnapshotTable {
    pub beta: Vec<f64>,
    pub u: Vec<f64>,
    pub rho: Vec<f64>,
    pub g: Vec<f64>,
    pub kappa_beta: Vec<f64>,
    pub kappa_azimuthal: Vec<f64>,
}

pub fn read_snapshot(path: &Path) -> Result<SnapshotTable, OutputError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut t = SnapshotTable::default();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| {
                s.trim().parse().map_err(|_| OutputError::Parse {
                    path: path.display().to_string(),
                    value: s.to_string(),
                })
            })
            .collect::<Result<_, _>>()?;
        if vals.len() != SNAPSHOT_COLUMNS.len() {
            return Err(OutputError::Parse {
                path: path.display().to_string(),
                value: rec.iter().collect::<Vec<_>>().join(","),
            });
        }
        t.beta.push(vals[0]);
        t.u.push(vals[1]);
        t.rho.push(vals[2]);
        t.g.push(vals[3]);
        t.kappa_beta.push(vals[4]);
        t.kappa_azimuthal.push(vals[5]);
    }
    Ok(t)
}

pub fn write_timeseries(path: &Path, records: &[&ObservableRecord]) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(TIMESERIES_COLUMNS).map_err(csv_err(path))?;
    for r in records {
        let row = [r.t, r.area, r.wetting, r.volume, r.energy, r.max_abs_g, r.kappa_spread];
        w.write_record(row.iter().map(|v| fmt(*v))).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Write every snapshot and the time series into `dir`.
pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<(), OutputError> {
    std::fs::create_dir_all(dir).map_err(|source| OutputError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let betas: Vec<f64> = traj.grid.nodes().collect();
    for snap in &traj.snapshots {
        write_snapshot(&dir.join(snapshot_file_name(snap.step)), snap, &betas)?;
    }
    let records: Vec<&ObservableRecord> = traj.snapshots.iter().map(|s| &s.record).collect();
    write_timeseries(&dir.join(TIMESERIES_FILE), &records)
}

/// Outcome of one invariant check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl InvariantResult {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub termination: String,
    pub steps: usize,
    pub wall_time_s: f64,
    pub t_final: f64,
    pub angle_restriction_satisfied: bool,
    pub initial: ObservableRecord,
    #[serde(rename = "final")]
    pub final_record: ObservableRecord,
    pub cap_fit: Option<CapFit>,
    pub isoperimetric: Option<IsoperimetricReport>,
    pub enclosure: Enclosure,
    pub gradient: GradientDiagnostic,
    pub decay_rate: Option<f64>,
    pub invariants: Vec<InvariantResult>,
    pub all_invariants_pass: bool,
}

/// Names of the invariant checks recorded in every summary.
pub const INVARIANT_NAMES: [&str; 7] = [
    "volume_conservation",
    "energy_monotonicity",
    "enclosure",
    "gradient_bound",
    "umbilicity",
    "cap_fit",
    "isoperimetric",
];

/// Evaluate the run invariants and assemble the summary.
pub fn summarize(config: &RunConfig, traj: &Trajectory, wall_time_s: f64) -> RunSummary {
    use crate::flow::{CONVERGED_FIT_RMS, CONVERGED_KAPPA_SPREAD, Termination};
    let first = traj.initial().record.clone();
    let last = traj.last().record.clone();
    let converged = traj.termination == Termination::Converged;

    let drift = (last.volume - first.volume).abs() / first.volume;
    let max_drift = traj
        .snapshots
        .iter()
        .map(|s| (s.record.volume - first.volume).abs() / first.volume)
        .fold(drift, f64::max);
    let mut worst_rise = f64::NEG_INFINITY;
    for pair in traj.snapshots.windows(2) {
        worst_rise = worst_rise.max(pair[1].record.energy - pair[0].record.energy);
    }
    let energy_ok = worst_rise <= ENERGY_STEP_SLACK * first.energy.abs() || traj.snapshots.len() < 2;
    let gradient = traj.gradient_diagnostic();
    let cap_fit = fit_cap_against(traj.final_state(), &traj.grid, &traj.sf, first.volume).ok();
    let isoperimetric = if converged { isoperimetric_check(traj).ok() } else { None };

    let mut invariants = vec![
        InvariantResult::new(
            "volume_conservation",
            max_drift <= VOLUME_DRIFT_TOLERANCE,
            format!("max relative drift {max_drift:.3e} (tolerance {VOLUME_DRIFT_TOLERANCE:.0e})"),
        ),
        InvariantResult::new(
            "energy_monotonicity",
            energy_ok,
            format!("largest snapshot-to-snapshot increase {worst_rise:.3e}"),
        ),
        InvariantResult::new(
            "enclosure",
            traj.enclosure.max_excursion <= traj.enclosure.tolerance,
            format!(
                "max excursion {:.3e} outside caps rhat in [{:.6}, {:.6}] (tolerance {:.3e})",
                traj.enclosure.max_excursion, traj.enclosure.inner_rhat, traj.enclosure.outer_rhat, traj.enclosure.tolerance
            ),
        ),
        InvariantResult::new(
            "gradient_bound",
            gradient.pass,
            format!("max|u_beta| {:.6} overall vs {:.6} early", gradient.overall_max, gradient.early_max),
        ),
    ];
    if converged {
        invariants.push(InvariantResult::new(
            "umbilicity",
            last.kappa_spread <= CONVERGED_KAPPA_SPREAD,
            format!("final kappa_spread {:.3e}", last.kappa_spread),
        ));
        let fit_ok = cap_fit.is_some_and(|f| f.rms <= CONVERGED_FIT_RMS && f.volume_match <= 1e-3);
        invariants.push(InvariantResult::new(
            "cap_fit",
            fit_ok,
            match cap_fit {
                Some(f) => format!("rms {:.3e}, volume match {:.3e}", f.rms, f.volume_match),
                None => "cap fit failed".to_string(),
            },
        ));
        invariants.push(InvariantResult::new(
            "isoperimetric",
            isoperimetric.is_some_and(|r| r.pass),
            match isoperimetric {
                Some(r) => format!("energy gap to volume-matched cap {:.3e}", r.cap_energy_gap),
                None => "volume-matched cap not found".to_string(),
            },
        ));
    } else {
        for name in ["umbilicity", "cap_fit", "isoperimetric"] {
            invariants.push(InvariantResult::new(name, false, "run did not converge".to_string()));
        }
    }
    let all_invariants_pass = invariants.iter().all(|i| i.pass);
    RunSummary {
        config: config.clone(),
        termination: traj.termination.as_str().to_string(),
        steps: traj.steps,
        wall_time_s,
        t_final: last.t,
        angle_restriction_satisfied: traj.sf.satisfies_angle_restriction(),
        initial: first,
        final_record: last,
        cap_fit,
        isoperimetric,
        enclosure: traj.enclosure,
        gradient,
        decay_rate: traj.decay_rate(),
        invariants,
        all_invariants_pass,
    }
}

pub fn write_summary(path: &Path, summary: &RunSummary) -> Result<(), OutputError> {
    let text = serde_json::to_string_pretty(summary)?;
    std::fs::write(path, text).map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })
}
