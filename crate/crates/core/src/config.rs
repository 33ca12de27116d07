//! Run configuration: the TOML file format and the validated [`FlowConfig`].
//!
//! ```toml
//! [spaceform]
//! K = -1
//! R = 1.0986122886681098
//! n = 2
//! theta = 1.0471975511965976
//!
//! [grid]
//! N = 128
//!
//! [flow]
//! cfl = 0.4
//! t_max = 5.0
//! tol_stop = 1e-7
//! snapshot_every = 2000
//! strict_angle = false
//!
//! [initial]
//! cap_rhat = 0.5
//! perturb_amp = 0.05
//! perturb_mode = 2
//!
//! [output]
//! dir = "out"
//! ```
//!
//! `[initial]` also accepts optional `barrier_inner` / `barrier_outer`: the
//! half-space radii of the two enclosing caps monitored during the run.

use crate::cap::CapProfile;
use crate::error::{ConfigError, GeometryError};
use crate::grid::{GraphState, Grid};
use crate::spaceform::{angle_bound, Curvature, SpaceForm};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Parsed TOML configuration, mirroring the file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spaceform: SpaceformSection,
    pub grid: GridSection,
    pub flow: FlowSection,
    pub initial: InitialSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceformSection {
    #[serde(rename = "K")]
    pub k: i64,
    #[serde(rename = "R")]
    pub r: f64,
    pub n: usize,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_max: f64,
    pub tol_stop: f64,
    pub snapshot_every: usize,
    #[serde(default)]
    pub strict_angle: bool,
}

fn default_cfl() -> f64 {
    0.4
}

fn default_mode() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub cap_rhat: f64,
    #[serde(default)]
    pub perturb_amp: f64,
    #[serde(default = "default_mode")]
    pub perturb_mode: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barrier_inner: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barrier_outer: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Validate every key and build the solver configuration.
    pub fn flow_config(&self) -> Result<FlowConfig, ConfigError> {
        let s = &self.spaceform;
        let curvature = Curvature::from_sign(s.k).map_err(|e| invalid("spaceform.K", e))?;
        if !(s.theta > 0.0 && s.theta < std::f64::consts::PI) {
            return Err(ConfigError::Invalid {
                key: "spaceform.theta",
                reason: format!("theta = {} must lie in the open range (0, pi)", s.theta),
            });
        }
        if s.n < 2 {
            return Err(ConfigError::Invalid {
                key: "spaceform.n",
                reason: format!("n = {} must be at least 2", s.n),
            });
        }
        let sf = SpaceForm::new(curvature, s.r, s.n, s.theta).map_err(|e| invalid("spaceform.R", e))?;
        let grid = Grid::new(self.grid.n).map_err(|e| invalid("grid.N", e))?;
        let f = &self.flow;
        let initial = InitialProfile {
            cap_rhat: self.initial.cap_rhat,
            perturb_amp: self.initial.perturb_amp,
            perturb_mode: self.initial.perturb_mode,
            barrier_inner: self.initial.barrier_inner,
            barrier_outer: self.initial.barrier_outer,
        };
        FlowConfig::new(sf, grid, initial, f.cfl, f.t_max, f.tol_stop, f.snapshot_every, f.strict_angle)
    }
}

fn invalid(key: &'static str, e: GeometryError) -> ConfigError {
    ConfigError::Invalid {
        key,
        reason: e.to_string(),
    }
}

/// Initial profile u_0 = log ρ_cap + amp·cos(mode·β), plus optional barrier caps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialProfile {
    pub cap_rhat: f64,
    pub perturb_amp: f64,
    pub perturb_mode: usize,
    pub barrier_inner: Option<f64>,
    pub barrier_outer: Option<f64>,
}

impl InitialProfile {
    /// Unperturbed capillary cap of half-space radius `rhat`.
    pub fn cap(rhat: f64) -> Self {
        Self {
            cap_rhat: rhat,
            perturb_amp: 0.0,
            perturb_mode: 2,
            barrier_inner: None,
            barrier_outer: None,
        }
    }

    pub fn perturbed(rhat: f64, amp: f64, mode: usize) -> Self {
        Self {
            perturb_amp: amp,
            perturb_mode: mode,
            ..Self::cap(rhat)
        }
    }

    pub fn state(&self, grid: &Grid, sf: &SpaceForm) -> Result<GraphState, GeometryError> {
        let cap = CapProfile::new(self.cap_rhat, sf)?;
        let m = self.perturb_mode as f64;
        let u = grid
            .nodes()
            .map(|b| cap.rho(b).ln() + self.perturb_amp * (m * b).cos())
            .collect();
        GraphState::new(u, 0.0, grid)
    }
}

/// Validated run specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowConfig {
    pub sf: SpaceForm,
    pub grid: Grid,
    pub initial: InitialProfile,
    pub cfl: f64,
    pub t_max: f64,
    /// Stop once max|G| falls below this; 0 disables the test.
    pub tol_stop: f64,
    pub snapshot_every: usize,
    pub strict_angle: bool,
}

impl FlowConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        sf: SpaceForm,
        grid: Grid,
        initial: InitialProfile,
        cfl: f64,
        t_max: f64,
        tol_stop: f64,
        snapshot_every: usize,
        strict_angle: bool,
    ) -> Result<Self, ConfigError> {
        let bad = |key, reason: String| Err(ConfigError::Invalid { key, reason });
        if !(cfl > 0.0 && cfl <= 0.5) {
            return bad("flow.cfl", format!("cfl = {cfl} must lie in (0, 0.5]"));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return bad("flow.t_max", format!("t_max = {t_max} must be positive"));
        }
        if !(tol_stop >= 0.0 && tol_stop.is_finite()) {
            return bad("flow.tol_stop", format!("tol_stop = {tol_stop} must be non-negative"));
        }
        if snapshot_every == 0 {
            return bad("flow.snapshot_every", "snapshot_every must be at least 1".into());
        }
        if !(initial.cap_rhat > 0.0 && initial.cap_rhat.is_finite()) {
            return bad("initial.cap_rhat", format!("cap_rhat = {} must be positive", initial.cap_rhat));
        }
        if !initial.perturb_amp.is_finite() {
            return bad("initial.perturb_amp", "perturb_amp must be finite".into());
        }
        if !initial.perturb_mode.is_multiple_of(2) {
            return bad(
                "initial.perturb_mode",
                format!("perturb_mode = {} must be even so u_beta vanishes at both ends", initial.perturb_mode),
            );
        }
        for (key, value) in [
            ("initial.barrier_inner", initial.barrier_inner),
            ("initial.barrier_outer", initial.barrier_outer),
        ] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(key, format!("{v} must be a positive cap radius"));
                }
            }
        }
        if let (Some(a), Some(b)) = (initial.barrier_inner, initial.barrier_outer) {
            if a >= b {
                return bad("initial.barrier_outer", format!("outer radius {b} must exceed inner radius {a}"));
            }
        }
        if strict_angle && !sf.satisfies_angle_restriction() {
            return Err(ConfigError::AngleRestriction {
                cos_theta: sf.theta().cos().abs(),
                bound: angle_bound(sf.dim()),
                n: sf.dim(),
            });
        }
        Ok(Self {
            sf,
            grid,
            initial,
            cfl,
            t_max,
            tol_stop,
            snapshot_every,
            strict_angle,
        })
    }
}
