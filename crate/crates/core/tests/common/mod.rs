//! Independent oracles shared by the integration tests. Nothing here calls into
//! the solver beyond plain data accessors.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Half-space radial profile of the capillary cap of radius `rhat` and contact angle `theta`.
pub fn cap_rho(rhat: f64, theta: f64, beta: f64) -> f64 {
    let c = -rhat * theta.cos();
    c * beta.cos() + (rhat * rhat - c * c * beta.sin().powi(2)).sqrt()
}

/// Observed order per halving of h from residuals on grids `h` and `h/2^halvings`.
pub fn rate(coarse: f64, fine: f64, halvings: u32) -> f64 {
    (coarse.abs() / fine.abs()).log2() / halvings as f64
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Geodesic ball B(q, s) in the 3-dimensional space form of curvature `k`,
/// intersected with the geodesic ball of radius `big_r` about the origin;
/// `d` is the distance from the origin to q.
#[derive(Debug, Clone, Copy)]
pub struct BallPortion {
    pub k: f64,
    pub big_r: f64,
    pub d: f64,
    pub s: f64,
}

impl BallPortion {
    /// The θ = π/2 cap of half-space radius `rhat` in the ball of model radius `r0`.
    ///
    /// Along the axis the half-space → ball map is t ↦ r0 (t − 1)/(t + 1); the
    /// Euclidean sphere through the images of t = ±rhat is the full geodesic sphere.
    pub fn free_boundary_cap(k: f64, big_r: f64, r0: f64, rhat: f64) -> Self {
        let dist = |x: f64| if k < 0.0 { 2.0 * x.abs().atanh() } else { 2.0 * x.abs().atan() };
        let near = dist(r0 * (rhat - 1.0) / (rhat + 1.0));
        let far = dist(r0 * (rhat + 1.0) / (1.0 - rhat));
        Self { k, big_r, d: 0.5 * (near + far), s: 0.5 * (far - near) }
    }

    fn sn(&self, x: f64) -> f64 {
        if self.k < 0.0 { x.sinh() } else { x.sin() }
    }

    /// cos of the angular radius (at q, from the direction of the origin) of the
    /// part of ∂B(q, s) inside the big ball.
    fn kappa(&self) -> f64 {
        let (d, s, r) = (self.d, self.s, self.big_r);
        if self.k < 0.0 {
            (d.cosh() * s.cosh() - r.cosh()) / (d.sinh() * s.sinh())
        } else {
            (r.cos() - d.cos() * s.cos()) / (d.sin() * s.sin())
        }
    }

    /// Area of ∂B(q, s) inside the big ball.
    pub fn area(&self) -> f64 {
        2.0 * PI * self.sn(self.s).powi(2) * (1.0 - self.kappa().clamp(-1.0, 1.0))
    }

    /// Parameter intervals t ∈ [0, s] along the geodesic from q at angle φ
    /// (cos φ = `mu`) that lie inside the big ball.
    fn inside(&self, mu: f64) -> Vec<(f64, f64)> {
        let (d, r, s) = (self.d, self.big_r, self.s);
        let clip = |lo: f64, hi: f64| {
            let (lo, hi) = (lo.max(0.0), hi.min(s));
            (hi > lo).then_some((lo, hi))
        };
        if self.k < 0.0 {
            // cosh D cosh t − sinh D sinh t μ < cosh R, quadratic in e^t
            let (a, b, c) = (d.cosh(), d.sinh() * mu, r.cosh());
            let disc = c * c - (a * a - b * b);
            if disc <= 0.0 {
                return vec![];
            }
            let lo = ((c - disc.sqrt()) / (a - b)).ln();
            let hi = ((c + disc.sqrt()) / (a - b)).ln();
            clip(lo, hi).into_iter().collect()
        } else {
            // cos D cos t + sin D sin t μ > cos R
            let (a, b, c) = (d.cos(), d.sin() * mu, r.cos());
            let m = a.hypot(b);
            if c >= m {
                return vec![];
            }
            if c <= -m {
                return clip(0.0, s).into_iter().collect();
            }
            let (alpha, gamma) = (b.atan2(a), (c / m).acos());
            (-1..=1)
                .filter_map(|j| clip(alpha - gamma + 2.0 * PI * j as f64, alpha + gamma + 2.0 * PI * j as f64))
                .collect()
        }
    }

    /// Volume of B(q, s) inside the big ball, by polar coordinates about q.
    pub fn volume(&self) -> f64 {
        let primitive = |t: f64| {
            if self.k < 0.0 {
                0.5 * (t.sinh() * t.cosh() - t)
            } else {
                0.5 * (t - t.sin() * t.cos())
            }
        };
        let radial = |mu: f64| -> f64 {
            self.inside(mu).iter().map(|(lo, hi)| primitive(*hi) - primitive(*lo)).sum()
        };
        2.0 * PI * adaptive_simpson(&radial, -1.0, 1.0, 1e-12)
    }
}

/// Report label for a check.
pub fn verdict(pass: bool) -> &'static str {
    if pass { "PASS" } else { "FAIL" }
}

/// Self-checks of the oracle against whole-ball formulas.
pub fn oracle_self_check() -> Result<(), String> {
    // ball well inside the big ball: full geodesic sphere area and volume
    for k in [-1.0f64, 1.0] {
        let p = BallPortion { k, big_r: 1.2, d: 0.3, s: 0.5 };
        let (area, vol) = if k < 0.0 {
            (4.0 * PI * 0.5f64.sinh().powi(2), PI * (0.5f64.sinh() * 0.5f64.cosh() - 0.5) * 2.0)
        } else {
            (4.0 * PI * 0.5f64.sin().powi(2), PI * (0.5 - 0.5f64.sin() * 0.5f64.cos()) * 2.0)
        };
        let got = (p.area(), p.volume());
        if (got.0 - area).abs() > 1e-12 || (got.1 - vol).abs() > 1e-10 {
            return Err(format!("K = {k}: oracle gives {got:?}, expected ({area}, {vol})"));
        }
    }
    Ok(())
}
