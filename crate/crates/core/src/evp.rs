//! Elastic-viscous-plastic stepping.
//!
//! The stress becomes prognostic through an artificial elastic term with
//! modulus `zeta / T`. Each transport step of length `dt` is preceded by
//! `n_sub` alternating stress and velocity updates of length `dt / n_sub`,
//! with thickness, concentration and strength frozen at the old level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explicit::{transport_rhs, tvrk3_step, RhsHooks};
use crate::model::{validate_state, Boundary, Layout, PhysParams, State};
use crate::rheology::{self, ice_strength, strain_delta, viscosities, water_stress, wind_stress};
use crate::spatial::ModelSetup;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvpConfig {
    pub n_sub: usize,
    /// Damping timescale as a fraction of the transport step, `T / dt`.
    pub damping_factor: f64,
}

impl Default for EvpConfig {
    fn default() -> Self {
        Self {
            n_sub: 1000,
            damping_factor: 0.36,
        }
    }
}

impl EvpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_sub == 0 {
            return Err(Error::InvalidSpec("n_sub must be at least 1".into()));
        }
        if !(self.damping_factor.is_finite() && self.damping_factor > 0.0) {
            return Err(Error::InvalidSpec("damping factor must be positive".into()));
        }
        Ok(())
    }

    pub fn subcycle_dt(&self, dt: f64) -> f64 {
        dt / self.n_sub as f64
    }

    pub fn damping_time(&self, dt: f64) -> f64 {
        self.damping_factor * dt
    }
}

/// Implicit-in-sigma update of one cell:
///
/// ```text
/// (s - s_prev)/dte + s/((1+e^-2) T) + P/(2 (1+e^-2) T) = (zeta/T) du/dx
/// ```
pub fn stress_update_cell(
    sigma_prev: f64,
    du_dx: f64,
    zeta: f64,
    p: f64,
    dt_e: f64,
    t_damp: f64,
    params: &PhysParams,
) -> f64 {
    let k = params.one_plus_inv_e2();
    let num = sigma_prev / dt_e - p / (2.0 * k * t_damp) + zeta / t_damp * du_dx;
    num / (1.0 / dt_e + 1.0 / (k * t_damp))
}

/// Stress subcycle over all cells. `zeta` is rebuilt from the strain rate of
/// the previous velocity iterate and the frozen strength.
pub fn evp_stress_update(
    sigma_prev: &[f64],
    du_dx: &[f64],
    p_n: &[f64],
    dt_e: f64,
    t_damp: f64,
    params: &PhysParams,
) -> Vec<f64> {
    sigma_prev
        .iter()
        .zip(du_dx)
        .zip(p_n)
        .map(|((&s, &ux), &p)| {
            let (zeta, _) = viscosities(p, strain_delta(ux, params), params);
            stress_update_cell(s, ux, zeta, p, dt_e, t_damp, params)
        })
        .collect()
}

/// Velocity subcycle `u + dte / (rho h) (tau_a - tau_w(u) + d sigma/dx)`.
pub fn evp_velocity_update(
    u_prev: &[f64],
    sigma_s: &[f64],
    mass: &[f64],
    dt_e: f64,
    setup: &ModelSetup,
) -> Result<Vec<f64>> {
    let dsigma = setup.stress_divergence(sigma_s)?;
    let tau_a = wind_stress(setup.wind, &setup.params);
    let mut u: Vec<f64> = u_prev
        .iter()
        .enumerate()
        .map(|(i, &ui)| {
            if setup.is_pinned(i) {
                0.0
            } else {
                ui + dt_e / mass[i] * (tau_a - water_stress(ui, &setup.params) + dsigma[i])
            }
        })
        .collect();
    if setup.grid.boundary == Boundary::Periodic && setup.grid.layout == Layout::StaggeredCGrid {
        u[setup.grid.n_cells] = u[0];
    }
    Ok(u)
}

/// Viscous-plastic stress of a state, used to seed the prognostic stress.
pub fn initial_stress(state: &State, setup: &ModelSetup) -> Result<Vec<f64>> {
    let du_dx = setup.strain_rate(&state.u)?;
    Ok(rheology::stress_field(&du_dx, &state.h, &state.a, &setup.params))
}

/// Velocity range seen across the subcycles of one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubcycleStats {
    /// Model time at the start of the step.
    pub time: f64,
    pub min_u: f64,
    pub max_u: f64,
}

/// Receives `(subcycle index, velocity)` after every velocity update.
pub type SubcycleObserver<'a> = &'a mut dyn FnMut(usize, &[f64]);

/// One EVP step: `n_sub` stress/velocity subcycles followed by a TVRK3
/// transport step with the final velocity. `sigma` carries the prognostic
/// stress between steps.
pub fn evp_step(
    state: &State,
    dt: f64,
    cfg: &EvpConfig,
    setup: &ModelSetup,
    sigma: &mut Vec<f64>,
    hooks: &RhsHooks<'_>,
    mut observer: Option<SubcycleObserver<'_>>,
) -> Result<(State, SubcycleStats)> {
    cfg.validate()?;
    validate_state(state, &setup.grid)?;
    let dt_e = cfg.subcycle_dt(dt);
    let t_damp = cfg.damping_time(dt);
    let params = &setup.params;

    let p_n: Vec<f64> = state
        .h
        .iter()
        .zip(&state.a)
        .map(|(&h, &a)| ice_strength(h, a, params))
        .collect();
    let mass = setup.velocity_mass(&state.h)?;

    let mut u = state.u.clone();
    let mut stats = SubcycleStats {
        time: state.time,
        min_u: f64::INFINITY,
        max_u: f64::NEG_INFINITY,
    };
    for s in 0..cfg.n_sub {
        let du_dx = setup.strain_rate(&u)?;
        *sigma = evp_stress_update(sigma, &du_dx, &p_n, dt_e, t_damp, params);
        u = evp_velocity_update(&u, sigma, &mass, dt_e, setup)?;
        for &v in &u {
            stats.min_u = stats.min_u.min(v);
            stats.max_u = stats.max_u.max(v);
        }
        if let Some(obs) = observer.as_mut() {
            obs(s + 1, &u);
        }
        if let Some(index) = u.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { field: "u", index });
        }
    }

    let with_velocity = State {
        time: state.time,
        u,
        h: state.h.clone(),
        a: state.a.clone(),
    };
    let next = tvrk3_step(&with_velocity, dt, |s| transport_rhs(s, setup, hooks))?;
    Ok((next, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_grid, Scheme};
    use approx::assert_relative_eq;

    fn setup(scheme: Scheme, wind: f64) -> ModelSetup {
        let grid = make_grid(32, 1e4, scheme.layout(), Boundary::Periodic).unwrap();
        ModelSetup::new(grid, PhysParams::default(), scheme, wind).unwrap()
    }

    #[test]
    fn rest_stress_is_a_fixed_point() {
        let p = PhysParams::default();
        let pr = ice_strength(1.0, 0.9, &p);
        let s = stress_update_cell(-0.5 * pr, 0.0, 1e12, pr, 0.01, 3.6, &p);
        assert_relative_eq!(s, -0.5 * pr, max_relative = 1e-15);
    }

    #[test]
    fn long_subcycle_recovers_viscous_plastic_stress() {
        let p = PhysParams::default();
        let (ux, pr) = (3e-8, 2000.0);
        let (zeta, eta) = viscosities(pr, strain_delta(ux, &p), &p);
        let s = stress_update_cell(123.0, ux, zeta, pr, 1e30, 3.6, &p);
        assert_relative_eq!(s, rheology::stress(zeta, eta, ux, pr), max_relative = 1e-12);
    }

    #[test]
    fn stress_update_matches_scalar_reference() {
        let p = PhysParams::default();
        let (sp, ux, pr, dte, t) = (-900.0, -2e-8, 1500.0, 0.01, 3.6);
        let (zeta, _) = viscosities(pr, strain_delta(ux, &p), &p);
        // Rearranged by hand: s (1/dte + 1/(1.25 T)) = sp/dte - P/(2.5 T) + zeta ux / T.
        let reference = (sp / dte - pr / (2.5 * t) + zeta * ux / t) / (1.0 / dte + 1.0 / (1.25 * t));
        let got = evp_stress_update(&[sp], &[ux], &[pr], dte, t, &p);
        assert_relative_eq!(got[0], reference, max_relative = 1e-14);
    }

    #[test]
    fn velocity_update_examples() {
        let s = setup(Scheme::Cd, 10.0);
        let mass = vec![900.0; 33];
        let sigma = vec![-100.0; 32];
        let u = evp_velocity_update(&[0.0; 33], &sigma, &mass, 0.01, &s).unwrap();
        for v in &u {
            assert_relative_eq!(*v, 0.01 * 0.156 / 900.0, max_relative = 1e-12);
        }

        let calm = setup(Scheme::Cd, 0.0);
        let still = evp_velocity_update(&[0.0; 33], &sigma, &mass, 0.01, &calm).unwrap();
        assert!(still.iter().all(|&v| v == 0.0));
        let moving = evp_velocity_update(&[0.1; 33], &sigma, &mass, 0.01, &calm).unwrap();
        assert!(moving.iter().all(|&v| v < 0.1 && v > 0.0));
    }

    #[test]
    fn rest_state_survives_subcycling() {
        for scheme in [Scheme::Cd, Scheme::Weno] {
            let s = setup(scheme, 0.0);
            let st = State::uniform(&s.grid, 0.0, 1.0, 0.9);
            let mut sigma = initial_stress(&st, &s).unwrap();
            let sigma0 = sigma.clone();
            let cfg = EvpConfig { n_sub: 50, ..EvpConfig::default() };
            let (next, stats) = evp_step(&st, 10.0, &cfg, &s, &mut sigma, &RhsHooks::default(), None).unwrap();
            assert_eq!(next.u, st.u);
            assert_eq!(stats.min_u, 0.0);
            for (a, b) in sigma.iter().zip(&sigma0) {
                assert_relative_eq!(*a, *b, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn thickness_frozen_during_subcycles() {
        let s = setup(Scheme::Cd, 10.0);
        let mut st = State::uniform(&s.grid, 0.0, 1.0, 0.9);
        for (j, h) in st.h.iter_mut().enumerate() {
            *h = 1.0 + 0.3 * (j as f64 * 0.4).sin();
        }
        let h0 = st.h.clone();
        let a0 = st.a.clone();
        let mut sigma = initial_stress(&st, &s).unwrap();
        let mut seen = 0;
        let mut obs = |_: usize, _: &[f64]| seen += 1;
        let cfg = EvpConfig { n_sub: 20, ..EvpConfig::default() };
        evp_step(&st, 10.0, &cfg, &s, &mut sigma, &RhsHooks::default(), Some(&mut obs)).unwrap();
        assert_eq!(seen, 20);
        assert_eq!(st.h, h0);
        assert_eq!(st.a, a0);
    }

    #[test]
    fn subcycle_refinement_is_cauchy() {
        let s = setup(Scheme::Cd, 10.0);
        let mut st = State::uniform(&s.grid, 0.0, 1.0, 0.9);
        for (j, h) in st.h.iter_mut().enumerate() {
            *h = 1.0 + 0.2 * (2.0 * std::f64::consts::PI * (j as f64 + 0.5) / 32.0).sin();
        }
        let run = |n_sub: usize| {
            let mut sigma = initial_stress(&st, &s).unwrap();
            let cfg = EvpConfig { n_sub, ..EvpConfig::default() };
            evp_step(&st, 10.0, &cfg, &s, &mut sigma, &RhsHooks::default(), None).unwrap().0.u
        };
        let us: Vec<Vec<f64>> = [100, 200, 400, 800].iter().map(|&n| run(n)).collect();
        let diffs: Vec<f64> = us
            .windows(2)
            .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .collect();
        assert!(diffs[1] < diffs[0] && diffs[2] < diffs[1], "{diffs:?}");
    }
}
