//! Property checks of the model geometry and of the flow against independent oracles.

mod common;

use capflow_core::config::InitialProfile;
use capflow_core::observables::GraphGeometry;
use capflow_core::{evolve, CapProfile, Curvature, FlowConfig, GraphState, Grid, SpaceForm, Termination};
use proptest::prelude::*;
use std::f64::consts::PI;

fn space(k: f64, radius: f64, n: usize, theta: f64) -> SpaceForm {
    let curvature = if k < 0.0 { Curvature::Hyperbolic } else { Curvature::Spherical };
    SpaceForm::new(curvature, radius, n, theta).unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Fourth-order central difference of a vector-valued map along coordinate `j`.
fn partial(f: &dyn Fn(&[f64]) -> Vec<f64>, p: &[f64], j: usize, h: f64) -> Vec<f64> {
    let at = |s: f64| {
        let mut q = p.to_vec();
        q[j] += s;
        f(&q)
    };
    let (m2, m1, p1, p2) = (at(-2.0 * h), at(-h), at(h), at(2.0 * h));
    (0..p.len()).map(|i| (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn halfspace_map_round_trips(
        k in prop::sample::select(vec![-1.0, 1.0]),
        radius in 0.3f64..1.4,
        z in prop::collection::vec(-2.0f64..2.0, 2),
        h in 0.0f64..3.0,
    ) {
        let sf = space(k, radius, 2, 1.0);
        let z = [z[0], z[1], h];
        let back = sf.ball_to_halfspace(&sf.halfspace_to_ball(&z));
        for (a, b) in back.iter().zip(&z) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + norm(&z).powi(2)));
        }
        prop_assert!(norm(&sf.halfspace_to_ball(&z)) <= sf.r0() * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn conformal_factor_is_the_pulled_back_ball_metric(
        k in prop::sample::select(vec![-1.0, 1.0]),
        radius in 0.3f64..1.4,
        z in prop::collection::vec(-1.5f64..1.5, 2),
        h in 0.0f64..2.0,
    ) {
        let sf = space(k, radius, 2, 1.0);
        let z = [z[0], z[1], h];
        let map = |p: &[f64]| sf.halfspace_to_ball(p);
        let lambda = sf.ball_factor(&map(&z));
        // the map is conformal: all columns of the Jacobian have the same length
        let scales: Vec<f64> = (0..3).map(|j| norm(&partial(&map, &z, j, 1e-3))).collect();
        for s in &scales {
            prop_assert!((s - scales[0]).abs() <= 1e-10 * scales[0]);
        }
        let expected = sf.conformal_factor(&z);
        prop_assert!((lambda * scales[0] - expected).abs() <= 1e-10 * expected, "{} vs {}", lambda * scales[0], expected);
    }

    #[test]
    fn x_a_is_conformal_killing_with_factor_2v_a(
        k in prop::sample::select(vec![-1.0, 1.0]),
        radius in 0.3f64..1.4,
        dir in prop::collection::vec(-1.0f64..1.0, 3),
        frac in 0.0f64..0.95,
    ) {
        let sf = space(k, radius, 2, 1.0);
        let len = norm(&dir).max(1e-3);
        let x: Vec<f64> = dir.iter().map(|c| c / len * frac * sf.r0()).collect();
        let field = |p: &[f64]| sf.killing_vectors(p).0;
        let jac: Vec<Vec<f64>> = (0..3).map(|j| partial(&field, &x, j, 1e-4)).collect();
        let xv = field(&x);
        // ∇ log λ for λ = 2/(1 + K|x|²)
        let denom = 1.0 + k * x.iter().map(|c| c * c).sum::<f64>();
        let dot_grad: f64 = xv.iter().zip(&x).map(|(v, c)| -2.0 * k * c / denom * v).sum();
        // L_X ḡ = 2V ḡ  ⇔  sym(DX) + (X·∇log λ) I = V I
        let v = sf.killing_scalar(&x);
        #[allow(clippy::needless_range_loop)]
        for i in 0..3 {
            for j in 0..3 {
                let sym = 0.5 * (jac[j][i] + jac[i][j]);
                let target = if i == j { v - dot_grad } else { 0.0 };
                prop_assert!((sym - target).abs() <= 1e-8, "({i},{j}): {sym} vs {target}");
            }
        }
    }

    #[test]
    fn x_a_is_tangent_to_the_boundary(
        k in prop::sample::select(vec![-1.0, 1.0]),
        radius in 0.3f64..1.4,
        dir in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let sf = space(k, radius, 2, 1.0);
        let len = norm(&dir).max(1e-3);
        let x: Vec<f64> = dir.iter().map(|c| c / len * sf.r0()).collect();
        let xa = sf.killing_vectors(&x).0;
        let normal_part: f64 = xa.iter().zip(&x).map(|(v, c)| v * c).sum();
        prop_assert!(normal_part.abs() <= 1e-13);
    }
}

#[test]
fn caps_satisfy_minkowski_identities_to_quadrature_error() {
    let g = Grid::new(512).unwrap();
    for k in [-1.0, 1.0] {
        for n in [2, 3] {
            for theta in [PI / 3.0, 2.0 * PI / 3.0] {
                let sf = space(k, 1.0, n, theta);
                let geom = GraphGeometry::new(&CapProfile::new(0.5, &sf).unwrap().state(&g), &g, &sf).unwrap();
                for order in 1..=n {
                    let r = geom.minkowski_residual(order).unwrap();
                    assert!(r.abs() <= 1e-8, "K={k} n={n} theta={theta} k={order}: {r:e}");
                }
            }
        }
    }
}

/// Cap plus a cos(mβ) bump, shifted in u so that the enclosed volume equals the cap's.
fn volume_matched_perturbation(sf: &SpaceForm, grid: &Grid, rhat: f64, amp: f64, mode: f64) -> GraphState {
    let base: Vec<f64> = grid.nodes().map(|b| common::cap_rho(rhat, sf.theta(), b).ln() + amp * (mode * b).cos()).collect();
    let with_shift = |d: f64| GraphState::new(base.iter().map(|u| u + d).collect(), 0.0, grid).unwrap();
    let volume = |d: f64| GraphGeometry::new(&with_shift(d), grid, sf).unwrap().volume();
    let target = GraphGeometry::new(&CapProfile::new(rhat, sf).unwrap().state(grid), grid, sf).unwrap().volume();
    let (mut lo, mut hi) = (-0.5, 0.5);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if volume(mid) < target { lo = mid } else { hi = mid }
    }
    with_shift(0.5 * (lo + hi))
}

#[test]
fn different_perturbations_reach_the_same_energy() {
    let sf = space(-1.0, 3f64.ln(), 2, PI / 3.0);
    let grid = Grid::new(64).unwrap();
    let cap_energy = GraphGeometry::new(&CapProfile::new(0.5, &sf).unwrap().state(&grid), &grid, &sf).unwrap().energy();
    let mut finals = Vec::new();
    for (amp, mode) in [(0.05, 2.0), (-0.04, 4.0)] {
        let start = volume_matched_perturbation(&sf, &grid, 0.5, amp, mode);
        let cfg = FlowConfig::new(sf, grid, InitialProfile::cap(0.5), 0.4, 20.0, 1e-7, 200, false).unwrap();
        let traj = run_from(&cfg, start);
        assert_eq!(traj.0, Termination::Converged);
        finals.push(traj.1);
    }
    assert!((finals[0] - finals[1]).abs() <= 2e-3 * finals[0].abs(), "{finals:?}");
    for e in &finals {
        assert!((e - cap_energy).abs() <= 1e-3 * cap_energy.abs(), "{e} vs cap {cap_energy}");
    }
}

/// Evolve an arbitrary starting state by stepping explicitly until max|G| < tol.
fn run_from(cfg: &FlowConfig, start: GraphState) -> (Termination, f64) {
    let (grid, sf) = (&cfg.grid, &cfg.sf);
    let mut state = start;
    let mut t = 0.0;
    while t < cfg.t_max {
        let g = capflow_core::speed(&state, grid, sf).unwrap();
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < cfg.tol_stop {
            let energy = GraphGeometry::new(&state, grid, sf).unwrap().energy();
            return (Termination::Converged, energy);
        }
        let dt = capflow_core::stable_dt(&state, grid, sf, cfg.cfl).unwrap();
        state = capflow_core::step(&state, grid, sf, dt).unwrap();
        t += dt;
    }
    (Termination::TimeLimit, GraphGeometry::new(&state, grid, sf).unwrap().energy())
}

#[test]
fn evolve_matches_manual_stepping_on_the_configured_profile() {
    let sf = space(1.0, 1.0, 2, PI / 3.0);
    let grid = Grid::new(32).unwrap();
    let cfg = FlowConfig::new(sf, grid, InitialProfile::perturbed(0.5, 0.05, 2), 0.4, 20.0, 1e-7, 50, false).unwrap();
    let traj = evolve(&cfg).unwrap();
    let (term, energy) = run_from(&cfg, cfg.initial.state(&grid, &sf).unwrap());
    assert_eq!(traj.termination, term);
    assert!((traj.last().record.energy - energy).abs() <= 1e-9 * energy.abs());
}
