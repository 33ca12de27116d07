//! Ambient space forms, their conformal ball models and the half-space model.
//!
//! A geodesic ball B_R of H^{n+1} (K = −1) or S^{n+1} (K = +1) is realised as the
//! Euclidean ball |x| < r0 with metric λ(x)²|dx|², λ = 2/(1 + K|x|²). The
//! half-space model pulls this back along x = r0·f(z), where f is the Cayley-type
//! map sending the upper half space onto the unit ball; the pulled-back metric is
//! e^{2U}|dz|².
//!
//! The symmetry axis is fixed to a = −e_{n+1}; points are slices of length n+1
//! whose last entry is the axial coordinate.

use crate::error::GeometryError;
use serde::{Deserialize, Serialize};

/// Sign of the sectional curvature of the ambient space form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Curvature {
    /// K = −1.
    Hyperbolic,
    /// K = +1.
    Spherical,
}

impl Curvature {
    pub fn from_sign(k: i64) -> Result<Self, GeometryError> {
        match k {
            -1 => Ok(Self::Hyperbolic),
            1 => Ok(Self::Spherical),
            other => Err(GeometryError::CurvatureSign(other)),
        }
    }

    /// K as a float.
    pub fn sign(self) -> f64 {
        match self {
            Self::Hyperbolic => -1.0,
            Self::Spherical => 1.0,
        }
    }
}

/// Euclidean model radius r0 of the geodesic ball of radius `radius`.
///
/// K = −1: r0² = (cosh R − 1)/(cosh R + 1); K = +1: r0² = (1 − cos R)/(1 + cos R).
/// Both are evaluated through the half-angle forms tanh(R/2), tan(R/2).
pub fn radius_to_model(radius: f64, curvature: Curvature) -> Result<f64, GeometryError> {
    match curvature {
        Curvature::Hyperbolic => {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(GeometryError::Radius {
                    radius,
                    range: "(0, inf) for K = -1",
                });
            }
            Ok((0.5 * radius).tanh())
        }
        Curvature::Spherical => {
            if !(radius > 0.0 && radius < std::f64::consts::PI) {
                return Err(GeometryError::Radius {
                    radius,
                    range: "(0, pi) for K = +1",
                });
            }
            Ok((0.5 * radius).tan())
        }
    }
}

/// Inverse of [`radius_to_model`].
pub fn model_to_radius(r0: f64, curvature: Curvature) -> Result<f64, GeometryError> {
    let bad = || GeometryError::Domain(format!("model radius r0 = {r0} out of range"));
    match curvature {
        Curvature::Hyperbolic if r0 > 0.0 && r0 < 1.0 => Ok(2.0 * r0.atanh()),
        Curvature::Spherical if r0 > 0.0 && r0.is_finite() => Ok(2.0 * r0.atan()),
        _ => Err(bad()),
    }
}

/// |S^k|, the measure of the unit k-sphere.
pub fn sphere_measure(k: usize) -> f64 {
    use std::f64::consts::PI;
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_measure(k - 2),
    }
}

/// Bound (3n+1)/(5n−1) of the contact-angle restriction |cos θ| < bound.
pub fn angle_bound(n: usize) -> f64 {
    (3.0 * n as f64 + 1.0) / (5.0 * n as f64 - 1.0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The ambient model together with the hypersurface dimension and contact angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceForm {
    curvature: Curvature,
    radius: f64,
    r0: f64,
    dim: usize,
    theta: f64,
}

impl SpaceForm {
    pub fn new(
        curvature: Curvature,
        radius: f64,
        dim: usize,
        theta: f64,
    ) -> Result<Self, GeometryError> {
        if dim < 2 {
            return Err(GeometryError::Dimension(dim));
        }
        if !(theta > 0.0 && theta < std::f64::consts::PI) {
            return Err(GeometryError::Angle(theta));
        }
        let r0 = radius_to_model(radius, curvature)?;
        Ok(Self {
            curvature,
            radius,
            r0,
            dim,
            theta,
        })
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    /// K ∈ {−1, +1}.
    pub fn k(&self) -> f64 {
        self.curvature.sign()
    }

    /// Geodesic radius R.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Euclidean radius of the ball model.
    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// Hypersurface dimension n (the ambient dimension is n+1).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Same ambient model with a different contact angle.
    pub fn with_theta(&self, theta: f64) -> Result<Self, GeometryError> {
        Self::new(self.curvature, self.radius, self.dim, theta)
    }

    /// 1 + K r0².
    pub fn a_coef(&self) -> f64 {
        1.0 + self.k() * self.r0 * self.r0
    }

    /// 1 − K r0².
    pub fn b_coef(&self) -> f64 {
        1.0 - self.k() * self.r0 * self.r0
    }

    /// sinh R (K = −1) or sin R (K = +1), i.e. 2r0/(1 + K r0²).
    pub fn s_k(&self) -> f64 {
        2.0 * self.r0 / self.a_coef()
    }

    /// Whether |cos θ| < (3n+1)/(5n−1).
    pub fn satisfies_angle_restriction(&self) -> bool {
        self.theta.cos().abs() < angle_bound(self.dim)
    }

    /// Ball-model conformal factor λ(x) = 2/(1 + K|x|²).
    pub fn ball_factor(&self, x: &[f64]) -> f64 {
        2.0 / (1.0 + self.k() * dot(x, x))
    }

    /// Half-space conformal factor e^U(z) = 4r0/((1+Kr0²)(1+|z|²) + 2(1−Kr0²) z_{n+1}).
    pub fn conformal_factor(&self, z: &[f64]) -> f64 {
        let axial = z[z.len() - 1];
        4.0 * self.r0 / (self.a_coef() * (1.0 + dot(z, z)) + 2.0 * self.b_coef() * axial)
    }

    /// e^U at the half-space point with polar coordinates (ρ, β) about the axis.
    pub fn conformal_factor_polar(&self, rho: f64, beta: f64) -> f64 {
        4.0 * self.r0 / self.conformal_denominator(rho, beta)
    }

    /// (1+Kr0²)(1+ρ²) + 2(1−Kr0²)ρ cos β.
    pub(crate) fn conformal_denominator(&self, rho: f64, beta: f64) -> f64 {
        self.a_coef() * (1.0 + rho * rho) + 2.0 * self.b_coef() * rho * beta.cos()
    }

    /// Half-space point to ball-model point, x = r0·f(z).
    pub fn halfspace_to_ball(&self, z: &[f64]) -> Vec<f64> {
        let last = z.len() - 1;
        let tangential: f64 = dot(&z[..last], &z[..last]);
        let q = tangential + (1.0 + z[last]).powi(2);
        let mut x: Vec<f64> = z[..last].iter().map(|c| self.r0 * 2.0 * c / q).collect();
        x.push(self.r0 * (dot(z, z) - 1.0) / q);
        x
    }

    /// Ball-model point to half-space point, inverse of [`Self::halfspace_to_ball`].
    pub fn ball_to_halfspace(&self, x: &[f64]) -> Vec<f64> {
        let last = x.len() - 1;
        let y: Vec<f64> = x.iter().map(|c| c / self.r0).collect();
        let tangential: f64 = dot(&y[..last], &y[..last]);
        let q = tangential + (1.0 - y[last]).powi(2);
        let mut z: Vec<f64> = y[..last].iter().map(|c| 2.0 * c / q).collect();
        z.push((1.0 - dot(&y, &y)) / q);
        z
    }

    /// V_a = 2⟨x,a⟩/(1 + K|x|²).
    pub fn killing_scalar(&self, x: &[f64]) -> f64 {
        let xa = -x[x.len() - 1];
        2.0 * xa / (1.0 + self.k() * dot(x, x))
    }

    /// (X_a, Y_a) at a ball-model point.
    ///
    /// X_a = (2/(1+Kr0²))[⟨x,a⟩x − ½(|x|²+r0²)a], Y_a = ½(1−K|x|²)a + K⟨x,a⟩x.
    pub fn killing_vectors(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let last = x.len() - 1;
        let xa = -x[last];
        let xx = dot(x, x);
        let k = self.k();
        let scale = 2.0 / self.a_coef();
        let mut kx: Vec<f64> = x.iter().map(|c| scale * xa * c).collect();
        let mut ky: Vec<f64> = x.iter().map(|c| k * xa * c).collect();
        // a = −e_{n+1}
        kx[last] += scale * 0.5 * (xx + self.r0 * self.r0);
        ky[last] -= 0.5 * (1.0 - k * xx);
        (kx, ky)
    }

    /// Signed position p along a of the image of the axis point z = t·e_{n+1}.
    pub(crate) fn axis_to_ball(&self, t: f64) -> f64 {
        self.r0 * (1.0 - t) / (1.0 + t)
    }
}
