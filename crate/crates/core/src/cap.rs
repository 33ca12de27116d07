//! Spherical caps: the static solutions of the flow.
//!
//! In the half-space model a cap is the part of the Euclidean sphere
//! |z − c·e_{n+1}| = rhat above the plane z_{n+1} = 0. As a radial graph,
//!
//!   ρ_cap(β) = c cos β + sqrt(rhat² − c² sin²β).
//!
//! The sphere meets the plane at angle θ (measured inside the enclosed region)
//! when c = −rhat·cos θ, which gives the boundary slope d log ρ/dβ = cot θ at
//! β = π/2. Conformal maps send spheres to spheres, so the image in the ball
//! model is a capillary cap {|x − m·a| = r} with m² = r² + 2 r r0 cos θ + r0².

use crate::error::GeometryError;
use crate::grid::{GraphState, Grid};
use crate::spaceform::SpaceForm;
use serde::Serialize;

/// Axis-centred half-space sphere (c, rhat) restricted to the upper half space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapProfile {
    c: f64,
    rhat: f64,
}

impl CapProfile {
    /// Capillary cap of half-space radius `rhat` meeting the boundary at the angle of `sf`.
    pub fn new(rhat: f64, sf: &SpaceForm) -> Result<Self, GeometryError> {
        Self::from_parts(-rhat * sf.theta().cos(), rhat)
    }

    /// Arbitrary axis-centred sphere that crosses the boundary plane.
    pub fn from_parts(c: f64, rhat: f64) -> Result<Self, GeometryError> {
        if !(rhat > 0.0 && rhat.is_finite() && c.is_finite() && c.abs() < rhat) {
            return Err(GeometryError::Domain(format!(
                "sphere (c = {c}, rhat = {rhat}) does not cross the boundary plane"
            )));
        }
        Ok(Self { c, rhat })
    }

    /// Capillary cap whose ball-model sphere has Euclidean radius `r`.
    pub fn from_ball_radius(r: f64, sf: &SpaceForm) -> Result<Self, GeometryError> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(GeometryError::Domain(format!("cap radius r = {r} must be positive")));
        }
        // The ball radius grows from 0 to ∞ as rhat runs over (0, 1/(1 + cos θ)).
        let upper = 1.0 / (1.0 + sf.theta().cos());
        let (mut lo, mut hi) = (0.0, upper);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if axis_sphere(mid, sf).1 < r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Self::new(0.5 * (lo + hi), sf)
    }

    /// Signed center height c.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Half-space sphere radius.
    pub fn rhat(&self) -> f64 {
        self.rhat
    }

    /// Angle between the sphere and the boundary plane, from cos θ = −c/rhat.
    pub fn contact_angle(&self) -> f64 {
        (-self.c / self.rhat).acos()
    }

    /// Same contact angle, half-space radius scaled to `rhat`.
    pub fn scaled(&self, rhat: f64) -> Result<Self, GeometryError> {
        Self::from_parts(self.c / self.rhat * rhat, rhat)
    }

    pub fn rho(&self, beta: f64) -> f64 {
        let s = beta.sin();
        self.c * beta.cos() + (self.rhat * self.rhat - self.c * self.c * s * s).sqrt()
    }

    /// d log ρ/dβ of the profile.
    pub fn log_slope(&self, beta: f64) -> f64 {
        let (s, co) = beta.sin_cos();
        let root = (self.rhat * self.rhat - self.c * self.c * s * s).sqrt();
        let drho = -self.c * s - self.c * self.c * s * co / root;
        drho / (self.c * co + root)
    }

    /// ρ² − 2cρ cos β + c² − rhat² at β (zero on the profile).
    pub fn sphere_residual(&self, beta: f64) -> f64 {
        let rho = self.rho(beta);
        rho * rho - 2.0 * self.c * rho * beta.cos() + self.c * self.c - self.rhat * self.rhat
    }

    /// The profile u = log ρ_cap sampled on `grid` at time 0.
    pub fn state(&self, grid: &Grid) -> GraphState {
        GraphState::from_values(grid.nodes().map(|b| self.rho(b).ln()).collect(), 0.0)
    }

    /// Center m (along a) and radius r of the ball-model sphere, from a
    /// least-squares sphere fit through three mapped profile points.
    pub fn ball_sphere(&self, sf: &SpaceForm) -> (f64, f64) {
        // |x|² − 2m⟨x,a⟩ + (m² − r²) = 0 is linear in (m, w = m² − r²).
        let dim = sf.dim() + 1;
        let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for beta in [0.0, std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2] {
            let rho = self.rho(beta);
            let mut z = vec![0.0; dim];
            z[0] = rho * beta.sin();
            z[dim - 1] = rho * beta.cos();
            let x = sf.halfspace_to_ball(&z);
            let xa = -x[dim - 1];
            let xx: f64 = x.iter().map(|v| v * v).sum();
            // row: [2⟨x,a⟩, −1]·(m, w) = |x|²
            let (p, q) = (2.0 * xa, -1.0);
            s11 += p * p;
            s12 += p * q;
            s22 += q * q;
            b1 += p * xx;
            b2 += q * xx;
        }
        let det = s11 * s22 - s12 * s12;
        let m = (b1 * s22 - b2 * s12) / det;
        let w = (s11 * b2 - s12 * b1) / det;
        (m, (m * m - w).sqrt())
    }

    /// Euclidean radius r of the ball-model cap sphere.
    pub fn ball_radius(&self, sf: &SpaceForm) -> f64 {
        self.ball_sphere(sf).1
    }
}

/// Ball-model center and radius of the capillary cap with half-space radius
/// `rhat`, from the images of its two axis points t = c ± rhat.
fn axis_sphere(rhat: f64, sf: &SpaceForm) -> (f64, f64) {
    let c = -rhat * sf.theta().cos();
    let p1 = sf.axis_to_ball(c + rhat);
    let p2 = sf.axis_to_ball(c - rhat);
    (0.5 * (p1 + p2), 0.5 * (p2 - p1).abs())
}
