//! Residual verification suites: static caps, Minkowski identities and the
//! curvature cross-check, each with a grid-refinement rate.

use crate::cap::CapProfile;
use crate::config::FlowConfig;
use crate::error::{FlowError, GeometryError};
use crate::flow::speed;
use crate::grid::{GraphState, Grid};
use crate::observables::GraphGeometry;
use crate::spaceform::SpaceForm;
use serde::{Deserialize, Serialize};

/// Minimum acceptable refinement rate.
pub const MIN_RATE: f64 = 1.8;
/// Rounding level of a residual at N = 64; see [`roundoff_floor`].
pub const ROUNDOFF_FLOOR: f64 = 1e-11;
/// Static-cap threshold at N = 256; scaled as h² for other grids.
pub const STATIC_THRESHOLD_256: f64 = 1e-5;
/// Relative tolerance of the curvature cross-check.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-6;
/// Cap radii, relative to the configured `cap_rhat`, used by the static suite.
pub const CAP_SCALES: [f64; 3] = [0.6, 1.0, 1.4];

/// Observed convergence rate between the coarse and fine grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rate {
    Value(f64),
    Label(RateLabel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateLabel {
    /// No coarse grid available.
    #[serde(rename = "n/a")]
    NotAvailable,
    /// Both residuals are at rounding level.
    #[serde(rename = "exact")]
    Exact,
}

/// Rounding level of a residual built from second differences: rounding
/// errors in u are amplified by 1/h², so the floor scales as (N/64)².
pub fn roundoff_floor(grid: &Grid) -> f64 {
    ROUNDOFF_FLOOR * (grid.intervals() as f64 / 64.0).powi(2)
}

impl Rate {
    /// Rate per halving of h between residuals on grids `h` and `h/2`, given
    /// as (residual, rounding floor) pairs.
    pub fn between(coarse: Option<(f64, f64)>, fine: (f64, f64)) -> Self {
        match coarse {
            None => Self::Label(RateLabel::NotAvailable),
            Some((c, cf)) if c.abs() <= cf && fine.0.abs() <= fine.1 => Self::Label(RateLabel::Exact),
            Some((c, _)) => Self::Value((c.abs() / fine.0.abs()).log2()),
        }
    }

    /// Rates that are measured must reach [`MIN_RATE`]; labels pass.
    pub fn acceptable(&self) -> bool {
        match self {
            Self::Value(r) => *r >= MIN_RATE,
            Self::Label(_) => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticCapCheck {
    pub rhat: f64,
    pub residual: f64,
    pub coarse_residual: Option<f64>,
    pub threshold: f64,
    pub rate: Rate,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiCheck {
    pub profile: String,
    pub k: usize,
    pub residual: f64,
    pub coarse_residual: Option<f64>,
    pub rate: Rate,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub max_relative_difference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Contents of `verify.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    #[serde(rename = "K")]
    pub k: i64,
    pub n: usize,
    pub theta: f64,
    #[serde(rename = "N")]
    pub intervals: usize,
    pub coarse_intervals: Option<usize>,
    pub static_caps: Vec<StaticCapCheck>,
    pub minkowski: Vec<MinkowskiCheck>,
    pub curvature_cross_check: CrossCheck,
    pub warnings: Vec<String>,
    pub pass: bool,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Static-cap threshold C·h² with C fixed by 1e−5 at N = 256.
pub fn static_threshold(grid: &Grid) -> f64 {
    let h256 = std::f64::consts::FRAC_PI_2 / 256.0;
    STATIC_THRESHOLD_256 * (grid.h() / h256).powi(2)
}

/// max|G| of the cap with half-space radius `rhat`.
pub fn static_residual(rhat: f64, grid: &Grid, sf: &SpaceForm) -> Result<f64, FlowError> {
    let cap = CapProfile::new(rhat, sf)?;
    Ok(max_abs(&speed(&cap.state(grid), grid, sf)?))
}

fn profile_state(
    cap: &CapProfile,
    amp: f64,
    mode: usize,
    grid: &Grid,
) -> Result<GraphState, GeometryError> {
    let m = mode as f64;
    GraphState::new(grid.nodes().map(|b| cap.rho(b).ln() + amp * (m * b).cos()).collect(), 0.0, grid)
}

/// Largest relative difference between the mean of the conformal principal
/// curvatures and the closed-form mean curvature.
pub fn curvature_cross_check(state: &GraphState, grid: &Grid, sf: &SpaceForm) -> Result<f64, GeometryError> {
    let geom = GraphGeometry::new(state, grid, sf)?;
    let (kb, ka) = geom.principal_curvatures();
    let h = geom.mean_curvature();
    let scale = max_abs(&h).max(1e-300);
    let n = sf.dim() as f64;
    Ok(kb
        .iter()
        .zip(&ka)
        .zip(&h)
        .map(|((b, a), h)| ((b + (n - 1.0) * a) / n - h / n).abs() / (scale / n))
        .fold(0.0, f64::max))
}

/// Run all suites for the configured space form at N and N/2.
pub fn run_verification(config: &FlowConfig) -> Result<VerifyReport, FlowError> {
    let sf = &config.sf;
    let fine = config.grid;
    let coarse = Grid::new(fine.intervals() / 2).ok().filter(|_| fine.intervals().is_multiple_of(4));
    let mut warnings = Vec::new();
    if coarse.is_none() {
        warnings.push(format!(
            "grid N = {} cannot be halved to a valid grid; refinement rates reported as n/a",
            fine.intervals()
        ));
    }
    let threshold = static_threshold(&fine);
    if fine.intervals() < 256 {
        warnings.push(format!(
            "static-cap threshold scaled as h^2 to {threshold:.3e} for N = {}",
            fine.intervals()
        ));
    }

    let fine_floor = roundoff_floor(&fine);
    let coarse_floor = coarse.map(|g| roundoff_floor(&g));
    let rhat0 = config.initial.cap_rhat;
    let mut static_caps = Vec::new();
    for scale in CAP_SCALES {
        let rhat = rhat0 * scale;
        let residual = static_residual(rhat, &fine, sf)?;
        let coarse_residual = coarse.map(|g| static_residual(rhat, &g, sf)).transpose()?;
        let rate = Rate::between(coarse_residual.zip(coarse_floor), (residual, fine_floor));
        static_caps.push(StaticCapCheck {
            rhat,
            residual,
            coarse_residual,
            threshold,
            pass: residual <= threshold && rate.acceptable(),
            rate,
        });
    }

    let cap = CapProfile::new(rhat0, sf)?;
    let amp = if config.initial.perturb_amp != 0.0 { config.initial.perturb_amp } else { 0.05 };
    let mode = config.initial.perturb_mode.max(2);
    let profiles = [("cap".to_string(), 0.0), (format!("cap+{amp}cos({mode}beta)"), amp)];
    let mut minkowski = Vec::new();
    for (label, a) in &profiles {
        let geom_at = |g: &Grid| -> Result<GraphGeometry, GeometryError> {
            GraphGeometry::new(&profile_state(&cap, *a, mode, g)?, g, sf)
        };
        let fine_geom = geom_at(&fine)?;
        let coarse_geom = coarse.map(|g| geom_at(&g)).transpose()?;
        for k in 1..=sf.dim() {
            let residual = fine_geom.minkowski_residual(k)?;
            let coarse_residual = coarse_geom.as_ref().map(|g| g.minkowski_residual(k)).transpose()?;
            let rate = Rate::between(coarse_residual.zip(coarse_floor), (residual, fine_floor));
            minkowski.push(MinkowskiCheck {
                profile: label.clone(),
                k,
                residual,
                coarse_residual,
                pass: rate.acceptable(),
                rate,
            });
        }
    }

    let diff = curvature_cross_check(&profile_state(&cap, amp, mode, &fine)?, &fine, sf)?;
    let curvature_cross_check = CrossCheck {
        max_relative_difference: diff,
        tolerance: CROSS_CHECK_TOLERANCE,
        pass: diff <= CROSS_CHECK_TOLERANCE,
    };
    let pass = static_caps.iter().all(|c| c.pass) && minkowski.iter().all(|c| c.pass) && curvature_cross_check.pass;
    Ok(VerifyReport {
        k: sf.k() as i64,
        n: sf.dim(),
        theta: sf.theta(),
        intervals: fine.intervals(),
        coarse_intervals: coarse.map(|g| g.intervals()),
        static_caps,
        minkowski,
        curvature_cross_check,
        warnings,
        pass,
    })
}
