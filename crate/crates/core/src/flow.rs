//! The scalar speed G of the flow, explicit time stepping and the evolution loop.
//!
//! In the half-space model the flow is u_t = G(u_ββ, u_β, ρ, β). Writing
//! w = 1/(ρe^U) = (A(ρ + 1/ρ) + 2B cos β)/(4r0) and s_K = 2r0/A,
//!
//!   G = s_K div(u_β w/v) − (n+1) s_K u_β ∂_β w / v + 2nK cos θ r0²/A
//!       − (n cos θ/2ρ)(ρ² cos β + 2ρ + cos β − (ρ² − 1) sin β u_β),
//!
//! where div(W) = sin^{1−n}β ∂_β(sin^{n−1}β W) and ∂_β w is taken along the
//! graph by the chain rule. Equivalently G = v F̂/(ρe^U) with the normal speed F̂
//! of [`GraphPoint::normal_speed`].

use crate::config::FlowConfig;
use crate::convergence::fit_cap;
use crate::error::{FlowError, GeometryError};
use crate::grid::{derivatives_of, GraphState, Grid};
use crate::observables::{GraphGeometry, ObservableRecord};
use crate::pointwise::GraphPoint;
use crate::spaceform::SpaceForm;
use crate::cap::CapProfile;
use serde::{Deserialize, Serialize};

/// kappa_spread bound required before a run is reported converged.
pub const CONVERGED_KAPPA_SPREAD: f64 = 1e-3;
/// Cap-fit rms bound required before a run is reported converged.
pub const CONVERGED_FIT_RMS: f64 = 1e-5;
/// Enclosure tolerance ε_h = C·h².
pub const ENCLOSURE_CONSTANT: f64 = 0.1;

/// Coefficient of u_ββ in G, s_K/(ρ v³ e^U), times n at the pole where
/// cot β·u_β → u_ββ.
fn diffusion(p: &GraphPoint, sf: &SpaceForm) -> f64 {
    let v = p.v();
    let coef = sf.s_k() / (p.rho * v * v * v * p.conformal_factor(sf));
    if p.pole {
        coef * sf.dim() as f64
    } else {
        coef
    }
}

/// One speed evaluation with the by-products needed by the stepper.
struct SpeedEval {
    g: Vec<f64>,
    max_slope: f64,
    max_diffusion: f64,
}

fn speed_eval(u: &[f64], grid: &Grid, sf: &SpaceForm, t: f64) -> Result<SpeedEval, FlowError> {
    let d = derivatives_of(u, grid, sf.theta())?;
    let n = sf.dim() as f64;
    let r0 = sf.r0();
    let (a, b) = (sf.a_coef(), sf.b_coef());
    let sk = sf.s_k();
    let cos_t = sf.theta().cos();
    let constant = 2.0 * n * sf.k() * cos_t * r0 * r0 / a;
    let mut g = Vec::with_capacity(u.len());
    let mut max_slope: f64 = 0.0;
    let mut max_diffusion: f64 = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        let p = GraphPoint {
            beta: grid.beta(i),
            rho: ui.exp(),
            du: d.first[i],
            d2u: d.second[i],
            pole: i == 0,
        };
        let (sb, cb) = p.beta.sin_cos();
        let v = p.v();
        let w = (a * (p.rho + 1.0 / p.rho) + 2.0 * b * cb) / (4.0 * r0);
        let dw = (a * (p.rho - 1.0 / p.rho) * p.du - 2.0 * b * sb) / (4.0 * r0);
        let div = p.d2u * w / (v * v * v) + p.du * dw / v + (n - 1.0) * p.cot_du() * w / v;
        let value = sk * div - (n + 1.0) * sk * p.du * dw / v + constant
            - n * cos_t * p.p_term() / (2.0 * p.rho);
        if !value.is_finite() {
            return Err(FlowError::NumericalFailure { node: i, t });
        }
        g.push(value);
        max_slope = max_slope.max(p.du.abs());
        max_diffusion = max_diffusion.max(diffusion(&p, sf));
    }
    Ok(SpeedEval {
        g,
        max_slope,
        max_diffusion,
    })
}

/// G at every node (divergence form).
pub fn speed(state: &GraphState, grid: &Grid, sf: &SpaceForm) -> Result<Vec<f64>, FlowError> {
    Ok(speed_eval(state.u(), grid, sf, state.t())?.g)
}

/// G assembled as v·F̂/(ρe^U) from the closed-form support functions.
pub fn speed_from_normal_velocity(state: &GraphState, grid: &Grid, sf: &SpaceForm) -> Result<Vec<f64>, FlowError> {
    let geom = GraphGeometry::new(state, grid, sf)?;
    geom.points()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let value = p.v() * p.normal_speed(sf) / (p.rho * p.conformal_factor(sf));
            if value.is_finite() {
                Ok(value)
            } else {
                Err(FlowError::NumericalFailure { node: i, t: state.t() })
            }
        })
        .collect()
}

/// dt = cfl·h²/max_i D_i with D_i the coefficient of u_ββ in G.
pub fn stable_dt(state: &GraphState, grid: &Grid, sf: &SpaceForm, cfl: f64) -> Result<f64, FlowError> {
    let eval = speed_eval(state.u(), grid, sf, state.t())?;
    Ok(cfl * grid.h() * grid.h() / eval.max_diffusion)
}

fn midpoint(u: &[f64], k1: &[f64], grid: &Grid, sf: &SpaceForm, t: f64, dt: f64) -> Result<Vec<f64>, FlowError> {
    let mid: Vec<f64> = u.iter().zip(k1).map(|(a, k)| a + 0.5 * dt * k).collect();
    let k2 = speed_eval(&mid, grid, sf, t + 0.5 * dt)?.g;
    let next: Vec<f64> = u.iter().zip(&k2).map(|(a, k)| a + dt * k).collect();
    if let Some(node) = next.iter().position(|v| !v.is_finite()) {
        return Err(FlowError::NumericalFailure { node, t: t + dt });
    }
    Ok(next)
}

/// One explicit midpoint step of size dt.
pub fn step(state: &GraphState, grid: &Grid, sf: &SpaceForm, dt: f64) -> Result<GraphState, FlowError> {
    let k1 = speed_eval(state.u(), grid, sf, state.t())?.g;
    let next = midpoint(state.u(), &k1, grid, sf, state.t(), dt)?;
    Ok(GraphState::from_values(next, state.t() + dt))
}

/// Why the evolution loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    TimeLimit,
    NumericalFailure,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::TimeLimit => "time-limit",
            Self::NumericalFailure => "numerical-failure",
        }
    }
}

/// A recorded state with its speed, curvatures and observables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub step: usize,
    pub state: GraphState,
    pub speed: Vec<f64>,
    pub kappa_beta: Vec<f64>,
    pub kappa_azimuthal: Vec<f64>,
    pub record: ObservableRecord,
}

/// The two caps (half-space radii) enclosing the flow, with the worst excursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Enclosure {
    pub inner_rhat: f64,
    pub outer_rhat: f64,
    pub tolerance: f64,
    /// Largest amount by which ρ left the band (≤ 0 when strictly inside).
    pub max_excursion: f64,
}

impl Enclosure {
    fn excursion(&self, u: &[f64], unit: &[f64]) -> f64 {
        u.iter()
            .zip(unit)
            .map(|(ui, c)| {
                let rho = ui.exp();
                (self.inner_rhat * c - rho).max(rho - self.outer_rhat * c)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// max|u_β| over the first 1% of flow time against the whole run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientDiagnostic {
    pub early_max: f64,
    pub overall_max: f64,
    pub pass: bool,
}

/// Result of [`evolve`].
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub sf: SpaceForm,
    pub grid: Grid,
    pub snapshots: Vec<Snapshot>,
    pub termination: Termination,
    pub steps: usize,
    pub enclosure: Enclosure,
    /// (t, max|u_β|) after every step, starting at t = 0.
    #[serde(skip)]
    pub slope_history: Vec<(f64, f64)>,
}

impl Trajectory {
    pub fn initial(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Snapshot {
        &self.snapshots[self.snapshots.len() - 1]
    }

    pub fn final_state(&self) -> &GraphState {
        &self.last().state
    }

    pub fn gradient_diagnostic(&self) -> GradientDiagnostic {
        let t_end = self.slope_history.last().map_or(0.0, |p| p.0);
        let early_max = self
            .slope_history
            .iter()
            .filter(|(t, _)| *t <= 0.01 * t_end)
            .map(|p| p.1)
            .fold(0.0, f64::max);
        let overall_max = self.slope_history.iter().map(|p| p.1).fold(0.0, f64::max);
        GradientDiagnostic {
            early_max,
            overall_max,
            pass: overall_max <= 2.0 * early_max,
        }
    }

    /// Exponential decay rate λ of max|G| ~ e^{−λt}, fitted over the second half
    /// of the snapshots; `None` with fewer than three usable points.
    pub fn decay_rate(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self.snapshots[self.snapshots.len() / 2..]
            .iter()
            .filter(|s| s.record.max_abs_g > 1e-14)
            .map(|s| (s.record.t, s.record.max_abs_g.ln()))
            .collect();
        if pts.len() < 3 {
            return None;
        }
        let m = pts.len() as f64;
        let (st, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mt, my) = (st / m, sy / m);
        let (num, den) = pts
            .iter()
            .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mt) * (p.1 - my), a.1 + (p.0 - mt).powi(2)));
        (den > 0.0).then(|| -num / den)
    }
}

fn snapshot(step: usize, u: &[f64], t: f64, g: Vec<f64>, grid: &Grid, sf: &SpaceForm) -> Result<Snapshot, GeometryError> {
    let state = GraphState::from_values(u.to_vec(), t);
    let geom = GraphGeometry::new(&state, grid, sf)?;
    let (kappa_beta, kappa_azimuthal) = geom.principal_curvatures();
    let max_abs_g = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(Snapshot {
        step,
        record: geom.record(max_abs_g),
        state,
        speed: g,
        kappa_beta,
        kappa_azimuthal,
    })
}

/// Whether the state is umbilic and cap-shaped enough to be called converged.
fn joint_check(u: &[f64], t: f64, grid: &Grid, sf: &SpaceForm) -> bool {
    let state = GraphState::from_values(u.to_vec(), t);
    let Ok(geom) = GraphGeometry::new(&state, grid, sf) else {
        return false;
    };
    if geom.kappa_spread() > CONVERGED_KAPPA_SPREAD {
        return false;
    }
    matches!(fit_cap(&state, grid, sf), Ok(fit) if fit.rms <= CONVERGED_FIT_RMS)
}

/// Run the flow from the configured initial profile until max|G| < tol_stop
/// (with the joint umbilicity/cap-fit check) or t reaches t_max.
pub fn evolve(config: &FlowConfig) -> Result<Trajectory, FlowError> {
    let (grid, sf) = (&config.grid, &config.sf);
    let mut u = config.initial.state(grid, sf)?.u().to_vec();
    let unit = CapProfile::new(1.0, sf)?;
    let unit: Vec<f64> = grid.nodes().map(|b| unit.rho(b)).collect();
    let ratios = u.iter().zip(&unit).map(|(ui, c)| ui.exp() / c);
    let (lo, hi) = ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), q| (lo.min(q), hi.max(q)));
    let mut enclosure = Enclosure {
        inner_rhat: config.initial.barrier_inner.unwrap_or(lo),
        outer_rhat: config.initial.barrier_outer.unwrap_or(hi),
        tolerance: ENCLOSURE_CONSTANT * grid.h() * grid.h(),
        max_excursion: f64::NEG_INFINITY,
    };
    let check_enclosure = |enc: &mut Enclosure, u: &[f64], t: f64| -> Result<(), FlowError> {
        let ex = enc.excursion(u, &unit);
        enc.max_excursion = enc.max_excursion.max(ex);
        if ex > enc.tolerance {
            return Err(FlowError::InvariantViolation {
                invariant: "enclosure",
                detail: format!(
                    "profile left the band between caps rhat = {} and {} by {ex:.3e} (tolerance {:.3e}) at t = {t}",
                    enc.inner_rhat, enc.outer_rhat, enc.tolerance
                ),
            });
        }
        Ok(())
    };
    check_enclosure(&mut enclosure, &u, 0.0)?;

    let mut t = 0.0;
    let mut steps = 0;
    let mut snapshots = Vec::new();
    let mut slope_history = Vec::new();
    let mut next_joint_check = 0;
    let termination = loop {
        let eval = speed_eval(&u, grid, sf, t)?;
        slope_history.push((t, eval.max_slope));
        let max_g = eval.g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if steps % config.snapshot_every == 0 {
            snapshots.push(snapshot(steps, &u, t, eval.g.clone(), grid, sf)?);
        }
        if max_g < config.tol_stop && steps >= next_joint_check {
            if joint_check(&u, t, grid, sf) {
                break Termination::Converged;
            }
            next_joint_check = steps + config.snapshot_every;
        }
        if t >= config.t_max {
            break Termination::TimeLimit;
        }
        let remaining = config.t_max - t;
        let dt_stable = config.cfl * grid.h() * grid.h() / eval.max_diffusion;
        let (dt, last) = if dt_stable >= remaining { (remaining, true) } else { (dt_stable, false) };
        u = midpoint(&u, &eval.g, grid, sf, t, dt)?;
        t = if last { config.t_max } else { t + dt };
        steps += 1;
        check_enclosure(&mut enclosure, &u, t)?;
    };
    if snapshots.last().map(|s| s.step) != Some(steps) {
        let g = speed_eval(&u, grid, sf, t)?.g;
        snapshots.push(snapshot(steps, &u, t, g, grid, sf)?);
    }
    Ok(Trajectory {
        sf: *sf,
        grid: *grid,
        snapshots,
        termination,
        steps,
        enclosure,
        slope_history,
    })
}
