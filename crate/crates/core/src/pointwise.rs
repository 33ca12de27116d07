//! Closed-form geometric quantities at one point of a radial graph.
//!
//! With ρ = e^u, v = sqrt(1 + u_β²), A = 1 + K r0², B = 1 − K r0² and
//! e^U = 4r0/(A(1 + ρ²) + 2Bρ cos β), the graph satisfies
//!
//!   ḡ(X_a, ν) = (2r0/A)·ρ e^U / v
//!   V_a       = 2r0(1 − ρ²)/(A(1 + ρ²) + 2Bρ cos β)
//!   ḡ(Y_a, ν) = K r0 ρ e^U / v − A e^U P/(4r0 v)
//!   H         = −[Δu/(ρ v e^U) + nB sin β u_β/(2r0 v) + nA(ρ² − 1)/(4r0 ρ v)]
//!
//! where P = ρ² cos β + 2ρ + cos β − (ρ² − 1) sin β u_β and
//! Δu = u_ββ/v² + (n−1) cot β u_β (→ n u_ββ at the pole). The normal ν points
//! away from the half-space origin, so ḡ(X_a, ν) > 0.

use crate::spaceform::SpaceForm;

/// Pointwise data of the graph at one grid node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphPoint {
    pub beta: f64,
    pub rho: f64,
    pub du: f64,
    pub d2u: f64,
    /// Evaluate cot β·u_β by its limit u_ββ (β = 0).
    pub pole: bool,
}

impl GraphPoint {
    pub fn v(&self) -> f64 {
        (1.0 + self.du * self.du).sqrt()
    }

    pub fn conformal_factor(&self, sf: &SpaceForm) -> f64 {
        sf.conformal_factor_polar(self.rho, self.beta)
    }

    /// cot β·u_β with the pole limit.
    pub fn cot_du(&self) -> f64 {
        if self.pole {
            self.d2u
        } else {
            self.du / self.beta.tan()
        }
    }

    /// u_ββ/v² + (n−1) cot β u_β.
    pub fn laplacian(&self, n: usize) -> f64 {
        let v2 = 1.0 + self.du * self.du;
        self.d2u / v2 + (n as f64 - 1.0) * self.cot_du()
    }

    /// P = ρ² cos β + 2ρ + cos β − (ρ² − 1) sin β u_β.
    pub fn p_term(&self) -> f64 {
        let (s, c) = self.beta.sin_cos();
        let r = self.rho;
        r * r * c + 2.0 * r + c - (r * r - 1.0) * s * self.du
    }

    /// ḡ(X_a, ν).
    pub fn support_x(&self, sf: &SpaceForm) -> f64 {
        sf.s_k() * self.rho * self.conformal_factor(sf) / self.v()
    }

    /// V_a on the graph.
    pub fn killing_scalar(&self, sf: &SpaceForm) -> f64 {
        2.0 * sf.r0() * (1.0 - self.rho * self.rho) / sf.conformal_denominator(self.rho, self.beta)
    }

    /// ḡ(Y_a, ν).
    pub fn support_y(&self, sf: &SpaceForm) -> f64 {
        let r0 = sf.r0();
        let e = self.conformal_factor(sf);
        let v = self.v();
        sf.k() * r0 * self.rho * e / v - sf.a_coef() * e * self.p_term() / (4.0 * r0 * v)
    }

    /// Mean curvature H (sum of principal curvatures) in the ambient metric.
    pub fn mean_curvature(&self, sf: &SpaceForm) -> f64 {
        let n = sf.dim() as f64;
        let r0 = sf.r0();
        let v = self.v();
        let e = self.conformal_factor(sf);
        let lap = self.laplacian(sf.dim());
        -(lap / (self.rho * v * e)
            + n * sf.b_coef() * self.beta.sin() * self.du / (2.0 * r0 * v)
            + n * sf.a_coef() * (self.rho * self.rho - 1.0) / (4.0 * r0 * self.rho * v))
    }

    /// Normal speed F̂ = nV_a + n s_K cos θ ḡ(Y_a, ν) − H ḡ(X_a, ν).
    pub fn normal_speed(&self, sf: &SpaceForm) -> f64 {
        let n = sf.dim() as f64;
        n * self.killing_scalar(sf) + n * sf.s_k() * sf.theta().cos() * self.support_y(sf)
            - self.mean_curvature(sf) * self.support_x(sf)
    }

    /// Conformal principal curvatures (meridian κ_β, azimuthal κ_a).
    ///
    /// Euclidean curvatures of the radial graph, κ_β = (v² − u_ββ)/(ρv³) and
    /// κ_a = (1 − u_β cot β)/(ρv), are shifted by the conformal change:
    /// κ = e^{−U}(κ_E + ∂_ν U) with ∇U = −(2Az + 2B e_{n+1})/(A(1+|z|²) + 2B z_{n+1}).
    pub fn principal_curvatures(&self, sf: &SpaceForm) -> (f64, f64) {
        let (s, c) = self.beta.sin_cos();
        let v = self.v();
        let rho = self.rho;
        let kb = (v * v - self.d2u) / (rho * v * v * v);
        let ka = (1.0 - self.cot_du()) / (rho * v);
        // ⟨z, ν_E⟩ = ρ/v, ⟨e_{n+1}, ν_E⟩ = (cos β + u_β sin β)/v
        let denom = sf.conformal_denominator(rho, self.beta);
        let dnu = -(2.0 * sf.a_coef() * rho + 2.0 * sf.b_coef() * (c + self.du * s)) / (denom * v);
        let inv_e = 1.0 / self.conformal_factor(sf);
        (inv_e * (kb + dnu), inv_e * (ka + dnu))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaceform::Curvature;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn forms() -> [SpaceForm; 4] {
        [
            SpaceForm::new(Curvature::Hyperbolic, 3f64.ln(), 2, 1.0).unwrap(),
            SpaceForm::new(Curvature::Hyperbolic, 0.8, 3, 2.0).unwrap(),
            SpaceForm::new(Curvature::Spherical, 1.0, 2, 1.2).unwrap(),
            SpaceForm::new(Curvature::Spherical, 2.2, 3, 0.7).unwrap(),
        ]
    }

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Ball-model point, unit normal (ambient metric) for a graph point, by mapping
    /// the Euclidean half-space normal forward with a finite-difference Jacobian.
    fn mapped_frame(sf: &SpaceForm, p: &GraphPoint) -> (Vec<f64>, Vec<f64>) {
        let (s, c) = p.beta.sin_cos();
        let dim = sf.dim() + 1;
        let mut z = vec![0.0; dim];
        z[0] = p.rho * s;
        z[dim - 1] = p.rho * c;
        let mut nu = vec![0.0; dim];
        nu[0] = (s - p.du * c) / p.v();
        nu[dim - 1] = (c + p.du * s) / p.v();
        let eps = 1e-6;
        let plus: Vec<f64> = z.iter().zip(&nu).map(|(a, b)| a + eps * b).collect();
        let minus: Vec<f64> = z.iter().zip(&nu).map(|(a, b)| a - eps * b).collect();
        let xp = sf.halfspace_to_ball(&plus);
        let xm = sf.halfspace_to_ball(&minus);
        let x = sf.halfspace_to_ball(&z);
        let dir: Vec<f64> = xp.iter().zip(&xm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
        let lam = sf.ball_factor(&x);
        let len = lam * norm(&dir);
        (x, dir.iter().map(|d| d / len).collect())
    }

    fn metric_dot(sf: &SpaceForm, x: &[f64], a: &[f64], b: &[f64]) -> f64 {
        let lam = sf.ball_factor(x);
        lam * lam * a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>()
    }

    #[test]
    fn closed_forms_match_ball_model_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for sf in forms() {
            for _ in 0..50 {
                let p = GraphPoint {
                    beta: rng.gen_range(0.05..1.5),
                    rho: rng.gen_range(0.2..1.8),
                    du: rng.gen_range(-0.8..0.8),
                    d2u: 0.0,
                    pole: false,
                };
                let (x, nu) = mapped_frame(&sf, &p);
                let (kx, ky) = sf.killing_vectors(&x);
                let sx = metric_dot(&sf, &x, &kx, &nu);
                let sy = metric_dot(&sf, &x, &ky, &nu);
                assert!((sx - p.support_x(&sf)).abs() < 1e-7 * (1.0 + sx.abs()), "{sx}");
                assert!((sy - p.support_y(&sf)).abs() < 1e-7 * (1.0 + sy.abs()), "{sy}");
                let va = sf.killing_scalar(&x);
                assert!((va - p.killing_scalar(&sf)).abs() < 1e-12);
                assert!(p.support_x(&sf) > 0.0);
            }
        }
    }

    #[test]
    fn mean_curvature_is_sum_of_principal_curvatures() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for sf in forms() {
            for _ in 0..50 {
                let p = GraphPoint {
                    beta: rng.gen_range(0.05..1.55),
                    rho: rng.gen_range(0.2..1.8),
                    du: rng.gen_range(-0.8..0.8),
                    d2u: rng.gen_range(-2.0..2.0),
                    pole: false,
                };
                let (kb, ka) = p.principal_curvatures(&sf);
                let sum = kb + (sf.dim() as f64 - 1.0) * ka;
                let h = p.mean_curvature(&sf);
                assert!((sum - h).abs() < 1e-12 * (1.0 + h.abs()), "{sum} vs {h}");
            }
        }
    }

    #[test]
    fn pole_limit_is_continuous() {
        let sf = forms()[0];
        let at = |beta: f64, pole| GraphPoint {
            beta,
            rho: 0.7,
            du: -0.4 * beta,
            d2u: -0.4,
            pole,
        };
        let h0 = at(0.0, true).mean_curvature(&sf);
        let h1 = at(1e-6, false).mean_curvature(&sf);
        assert!((h0 - h1).abs() < 1e-5);
        let (b0, a0) = at(0.0, true).principal_curvatures(&sf);
        assert!((b0 - a0).abs() < 1e-12);
    }
}
