//! Area, wetting area, enclosed volume, energy, curvatures and Minkowski
//! residuals of a radial graph.
//!
//! Integrals over the hypersurface reduce to β-integrals with the area element
//! |S^{n−1}| e^{nU} ρ^n v sin^{n−1}β dβ and are evaluated by composite Simpson on
//! the grid. Ω is the region between the graph and the boundary plane.

use crate::error::GeometryError;
use crate::grid::{derivatives, GraphState, Grid};
use crate::pointwise::GraphPoint;
use crate::quadrature::{simpson, simpson_fn};
use crate::spaceform::{sphere_measure, SpaceForm};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

/// Inner Simpson intervals for the radial volume integral.
pub const VOLUME_RADIAL_INTERVALS: usize = 64;
/// Simpson intervals for the wetting-area integral.
pub const WETTING_INTERVALS: usize = 256;

/// Observables of one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub t: f64,
    pub area: f64,
    pub wetting: f64,
    pub volume: f64,
    pub energy: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub kappa_spread: f64,
    pub max_abs_g: f64,
    /// Area-normalised Minkowski residual for k = 1..=n.
    pub minkowski_residual: BTreeMap<usize, f64>,
}

/// Binomial coefficient C(n, k) as a float (0 when k > n).
fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// σ_k of (κ_β, κ_a, …, κ_a) with κ_a repeated n−1 times; σ_0 = 1.
pub fn sigma_k_of(kappa_beta: f64, kappa_azimuthal: f64, n: usize, k: usize) -> Result<f64, GeometryError> {
    if k > n {
        return Err(GeometryError::Domain(format!("sigma_k needs k <= n = {n}, got {k}")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    Ok(binomial(n - 1, k) * kappa_azimuthal.powi(k as i32)
        + binomial(n - 1, k - 1) * kappa_beta * kappa_azimuthal.powi(k as i32 - 1))
}

/// A snapshot with its derivatives and pointwise quantities precomputed.
#[derive(Debug, Clone)]
pub struct GraphGeometry {
    sf: SpaceForm,
    grid: Grid,
    t: f64,
    points: Vec<GraphPoint>,
    flat: bool,
}

impl GraphGeometry {
    pub fn new(state: &GraphState, grid: &Grid, sf: &SpaceForm) -> Result<Self, GeometryError> {
        let d = derivatives(state, grid, sf.theta())?;
        let points = state
            .u()
            .iter()
            .enumerate()
            .map(|(i, u)| GraphPoint {
                beta: grid.beta(i),
                rho: u.exp(),
                du: d.first[i],
                d2u: d.second[i],
                pole: i == 0,
            })
            .collect();
        Ok(Self {
            sf: *sf,
            grid: *grid,
            t: state.t(),
            points,
            flat: false,
        })
    }

    /// Same graph measured with the flat metric |dz|² (e^U ≡ 1).
    pub fn euclidean(mut self) -> Self {
        self.flat = true;
        self
    }

    pub fn points(&self) -> &[GraphPoint] {
        &self.points
    }

    fn weight(&self, rho: f64, beta: f64) -> f64 {
        if self.flat {
            1.0
        } else {
            self.sf.conformal_factor_polar(rho, beta)
        }
    }

    fn n(&self) -> usize {
        self.sf.dim()
    }

    /// Area elements e^{nU} ρ^n v sin^{n−1}β at the nodes.
    fn area_density(&self) -> Vec<f64> {
        let n = self.n() as i32;
        self.points
            .iter()
            .map(|p| {
                (self.weight(p.rho, p.beta) * p.rho).powi(n) * p.v() * p.beta.sin().powi(n - 1)
            })
            .collect()
    }

    /// ∫_Σ f dA for nodal values f.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let dens = self.area_density();
        let vals: Vec<f64> = dens.iter().zip(f).map(|(d, v)| d * v).collect();
        sphere_measure(self.n() - 1) * simpson(&vals, self.grid.h())
    }

    pub fn area(&self) -> f64 {
        sphere_measure(self.n() - 1) * simpson(&self.area_density(), self.grid.h())
    }

    /// Area of the wetted disk {|z| < ρ(π/2), z_{n+1} = 0}.
    pub fn wetting_area(&self) -> f64 {
        let n = self.n() as i32;
        let edge = self.points[self.points.len() - 1].rho;
        let f = |s: f64| self.weight(s, FRAC_PI_2).powi(n) * s.powi(n - 1);
        sphere_measure(self.n() - 1) * simpson_fn(f, 0.0, edge, WETTING_INTERVALS)
    }

    /// Volume of Ω.
    pub fn volume(&self) -> f64 {
        let n = self.n() as i32;
        let radial: Vec<f64> = self
            .points
            .iter()
            .map(|p| {
                let f = |s: f64| self.weight(s, p.beta).powi(n + 1) * s.powi(n);
                simpson_fn(f, 0.0, p.rho, VOLUME_RADIAL_INTERVALS) * p.beta.sin().powi(n - 1)
            })
            .collect();
        sphere_measure(self.n() - 1) * simpson(&radial, self.grid.h())
    }

    /// Capillary energy Area(Σ) − cos θ·Area(T).
    pub fn energy(&self) -> f64 {
        self.area() - self.sf.theta().cos() * self.wetting_area()
    }

    /// Conformal principal curvatures (κ_β, κ_a) at every node.
    pub fn principal_curvatures(&self) -> (Vec<f64>, Vec<f64>) {
        self.points.iter().map(|p| p.principal_curvatures(&self.sf)).unzip()
    }

    /// Mean curvature from the closed-form graph expression.
    pub fn mean_curvature(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean_curvature(&self.sf)).collect()
    }

    pub fn sigma_k(&self, k: usize) -> Result<Vec<f64>, GeometryError> {
        let (kb, ka) = self.principal_curvatures();
        kb.iter().zip(&ka).map(|(b, a)| sigma_k_of(*b, *a, self.n(), k)).collect()
    }

    /// Minkowski residual for σ_k, normalised by area:
    /// (n−k+1)∫σ_{k−1}(V_a + s_K cos θ ḡ(Y_a,ν)) − k∫σ_k ḡ(X_a,ν).
    pub fn minkowski_residual(&self, k: usize) -> Result<f64, GeometryError> {
        let n = self.n();
        if k == 0 || k > n {
            return Err(GeometryError::Domain(format!("Minkowski residual needs 1 <= k <= {n}, got {k}")));
        }
        let lower = self.sigma_k(k - 1)?;
        let upper = self.sigma_k(k)?;
        let sc = self.sf.s_k() * self.sf.theta().cos();
        let f: Vec<f64> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                (n - k + 1) as f64 * lower[i] * (p.killing_scalar(&self.sf) + sc * p.support_y(&self.sf))
                    - k as f64 * upper[i] * p.support_x(&self.sf)
            })
            .collect();
        Ok(self.integrate(&f) / self.area())
    }

    /// max over nodes of |κ_β − κ_a|.
    pub fn kappa_spread(&self) -> f64 {
        let (kb, ka) = self.principal_curvatures();
        kb.iter().zip(&ka).map(|(b, a)| (b - a).abs()).fold(0.0, f64::max)
    }

    /// All observables of the snapshot; `max_abs_g` is supplied by the caller.
    pub fn record(&self, max_abs_g: f64) -> ObservableRecord {
        let area = self.area();
        let wetting = self.wetting_area();
        let h = self.mean_curvature();
        let minkowski_residual = (1..=self.n())
            .map(|k| (k, self.minkowski_residual(k).unwrap_or(f64::NAN)))
            .collect();
        ObservableRecord {
            t: self.t,
            area,
            wetting,
            volume: self.volume(),
            energy: area - self.sf.theta().cos() * wetting,
            h_min: h.iter().copied().fold(f64::INFINITY, f64::min),
            h_max: h.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            kappa_spread: self.kappa_spread(),
            max_abs_g,
            minkowski_residual,
        }
    }
}

pub fn area(state: &GraphState, grid: &Grid, sf: &SpaceForm) -> Result<f64, GeometryError> {
    Ok(GraphGeometry::new(state, grid, sf)?.area())
}

pub fn wetting_area(state: &GraphState, grid: &Grid, sf: &SpaceForm) -> Result<f64, GeometryError> {
    Ok(GraphGeometry::new(state, grid, sf)?.wetting_area())
}

pub fn volume(state: &GraphState, grid: &Grid, sf: &SpaceForm) -> Result<f64, GeometryError> {
    Ok(GraphGeometry::new(state, grid, sf)?.volume())
}

pub fn energy(state: &GraphState, grid: &Grid, sf: &SpaceForm) -> Result<f64, GeometryError> {
    Ok(GraphGeometry::new(state, grid, sf)?.energy())
}

pub fn principal_curvatures(
    state: &GraphState,
    grid: &Grid,
    sf: &SpaceForm,
) -> Result<(Vec<f64>, Vec<f64>), GeometryError> {
    Ok(GraphGeometry::new(state, grid, sf)?.principal_curvatures())
}

pub fn minkowski_residual(state: &GraphState, grid: &Grid, sf: &SpaceForm, k: usize) -> Result<f64, GeometryError> {
    GraphGeometry::new(state, grid, sf)?.minkowski_residual(k)
}
