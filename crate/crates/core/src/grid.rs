//! Uniform β grid on [0, π/2], ghost-node closures and finite differences.
//!
//! Derivatives use the five-point central stencils
//!
//!   u'  ≈ (−u_{i+2} + 8u_{i+1} − 8u_{i−1} + u_{i−2}) / 12h
//!   u'' ≈ (−u_{i+2} + 16u_{i+1} − 30u_i + 16u_{i−1} − u_{i−2}) / 12h²
//!
//! with two ghost nodes at each end. At the pole the profile is even in β, so
//! u_{−k} = u_k. At the rim β = π/2 the ghosts come from the quintic through
//! u_N..u_{N−4} whose slope is the contact slope cot θ; the boundary slope itself
//! is installed exactly.

use crate::error::GeometryError;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Uniform grid β_i = i·h, i = 0..=N, h = (π/2)/N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    intervals: usize,
    h: f64,
}

impl Grid {
    /// N must be even (composite Simpson) and at least 16.
    pub fn new(intervals: usize) -> Result<Self, GeometryError> {
        if intervals < 16 || !intervals.is_multiple_of(2) {
            return Err(GeometryError::Grid(intervals));
        }
        Ok(Self {
            intervals,
            h: FRAC_PI_2 / intervals as f64,
        })
    }

    /// Number of intervals N.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of nodes N + 1.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn beta(&self, i: usize) -> f64 {
        if i == self.intervals {
            FRAC_PI_2
        } else {
            i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.intervals).map(|i| self.beta(i))
    }
}

/// Profile u_i = log ρ(β_i) at flow time t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphState {
    u: Vec<f64>,
    t: f64,
}

impl GraphState {
    /// Checked constructor: the grid size must match and all values be finite.
    pub fn new(u: Vec<f64>, t: f64, grid: &Grid) -> Result<Self, GeometryError> {
        if u.len() != grid.len() {
            return Err(GeometryError::Domain(format!(
                "profile has {} values, grid has {} nodes",
                u.len(),
                grid.len()
            )));
        }
        if let Some(i) = u.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::Domain(format!("non-finite u at node {i}")));
        }
        Ok(Self { u, t })
    }

    pub(crate) fn from_values(u: Vec<f64>, t: f64) -> Self {
        Self { u, t }
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn rho(&self) -> Vec<f64> {
        self.u.iter().map(|v| v.exp()).collect()
    }
}

/// Contact slope u_β(π/2) = cot θ: the root of u_β = cos θ·sqrt(1 + u_β²).
pub fn boundary_slope(theta: f64) -> Result<f64, GeometryError> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(GeometryError::Angle(theta));
    }
    Ok(theta.cos() / theta.sin())
}

/// Ghost values beyond both ends of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ghosts {
    /// (u_{−1}, u_{−2})
    pub pole: [f64; 2],
    /// (u_{N+1}, u_{N+2})
    pub rim: [f64; 2],
}

/// Ghost nodes enforcing u_β(0) = 0 and u_β(π/2) = cot θ.
pub fn boundary_closure(u: &[f64], grid: &Grid, theta: f64) -> Result<Ghosts, GeometryError> {
    let s = boundary_slope(theta)? * grid.h();
    let n = u.len() - 1;
    // Weights sum to one, so write them on differences from u_N: constant
    // profiles then produce exactly constant ghosts.
    let u0 = u[n];
    let (d1, d2, d3, d4) = (u[n - 1] - u0, u[n - 2] - u0, u[n - 3] - u0, u[n - 4] - u0);
    let g1 = u0 + (10.0 * d1 - 5.0 * d2 + 5.0 / 3.0 * d3 - 0.25 * d4 + 5.0 * s);
    let g2 = u0 + (80.0 * d1 - 45.0 * d2 + 16.0 * d3 - 2.5 * d4 + 30.0 * s);
    Ok(Ghosts {
        pole: [u[1], u[2]],
        rim: [g1, g2],
    })
}

/// First and second β-derivatives at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

/// Five-point derivatives of u with ghost closures; u_β is exact at both ends.
pub fn derivatives(state: &GraphState, grid: &Grid, theta: f64) -> Result<Derivatives, GeometryError> {
    derivatives_of(state.u(), grid, theta)
}

pub(crate) fn derivatives_of(u: &[f64], grid: &Grid, theta: f64) -> Result<Derivatives, GeometryError> {
    let ghosts = boundary_closure(u, grid, theta)?;
    let n = u.len() - 1;
    let at = |i: isize| -> f64 {
        match i {
            -2 => ghosts.pole[1],
            -1 => ghosts.pole[0],
            i if i as usize == n + 1 => ghosts.rim[0],
            i if i as usize == n + 2 => ghosts.rim[1],
            i => u[i as usize],
        }
    };
    let h = grid.h();
    let mut first = Vec::with_capacity(n + 1);
    let mut second = Vec::with_capacity(n + 1);
    for i in 0..=n as isize {
        // Stencils act on differences so that constants cancel exactly.
        let c = at(i);
        let (m2, m1, p1, p2) = (at(i - 2) - c, at(i - 1) - c, at(i + 1) - c, at(i + 2) - c);
        first.push((8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h));
        second.push((16.0 * (p1 + m1) - (p2 + m2)) / (12.0 * h * h));
    }
    first[0] = 0.0;
    first[n] = boundary_slope(theta)?;
    Ok(Derivatives { first, second })
}

/// Pointwise ρ = e^u and v = sqrt(1 + u_β²).
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
}

pub fn kinematics(state: &GraphState, d: &Derivatives) -> Kinematics {
    Kinematics {
        rho: state.rho(),
        v: d.first.iter().map(|p| (1.0 + p * p).sqrt()).collect(),
    }
}
