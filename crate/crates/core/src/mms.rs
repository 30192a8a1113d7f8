//! Manufactured-solution verification: a closed-form travelling wave, the
//! source terms that make it an exact solution of the forced system, and
//! spatial convergence tables.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explicit::{tvrk3_step, vp_rhs, RhsHooks, SourceTerms};
use crate::model::{make_grid, Boundary, Grid, PhysParams, Scheme, State};
use crate::rheology::{ice_strength, strain_delta, viscosities, water_stress, wind_stress};
use crate::spatial::ModelSetup;

/// Domain length of the manufactured problem, m.
pub const MMS_LENGTH: f64 = 2e6;
/// Phase speed of the manufactured wave, rad/s.
pub const MMS_OMEGA: f64 = 5.0 / 518_400.0;

const WAVE_K: f64 = 2.0 * PI / MMS_LENGTH;

/// The manufactured fields share one profile `phi = sin(theta) + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub params: PhysParams,
    /// Surface wind used by the solver; its stress is cancelled by `F_u`.
    pub wind: f64,
}

impl ManufacturedSolution {
    pub fn new(params: PhysParams, wind: f64) -> Self {
        Self { params, wind }
    }

    fn phase(x: f64, t: f64) -> f64 {
        WAVE_K * x + MMS_OMEGA * t - FRAC_PI_2
    }

    /// `(u, h, A)` at `(x, t)`.
    pub fn truth(&self, x: f64, t: f64) -> [f64; 3] {
        let phi = Self::phase(x, t).sin() + 1.0;
        [0.001 * phi + 0.2, phi + 0.1, 0.15 * phi + 0.7]
    }

    /// State sampled at the native locations of `grid`.
    pub fn state_on(&self, grid: &Grid, t: f64) -> State {
        State {
            time: t,
            u: grid.velocity_points().iter().map(|&x| self.truth(x, t)[0]).collect(),
            h: grid.centers().iter().map(|&x| self.truth(x, t)[1]).collect(),
            a: grid.centers().iter().map(|&x| self.truth(x, t)[2]).collect(),
        }
    }

    /// `(F_u, F_h, F_A)` at `(x, t)`.
    pub fn forcing(&self, x: f64, t: f64) -> [f64; 3] {
        let p = &self.params;
        let theta = Self::phase(x, t);
        let (s, c) = theta.sin_cos();
        let phi = s + 1.0;
        let phi_x = WAVE_K * c;
        let phi_xx = -WAVE_K * WAVE_K * s;
        let phi_t = MMS_OMEGA * c;

        let (u, u_x, u_xx, u_t) = (0.001 * phi + 0.2, 0.001 * phi_x, 0.001 * phi_xx, 0.001 * phi_t);
        let (h, h_x, h_t) = (phi + 0.1, phi_x, phi_t);
        let (a, a_x, a_t) = (0.15 * phi + 0.7, 0.15 * phi_x, 0.15 * phi_t);

        let f_h = h_t + u_x * h + u * h_x;
        let f_a = a_t + u_x * a + u * a_x;

        let k = p.one_plus_inv_e2();
        let pr = ice_strength(h, a, p);
        let pr_x = p.p_star * (-p.conc_c * (1.0 - a)).exp() * (h_x + p.conc_c * h * a_x);
        let delta = strain_delta(u_x, p);
        let delta_x = k * u_x * u_xx / delta;
        let r = p.delta_min / delta;
        let r_x = -r * delta_x / delta;
        let th = r.tanh();
        let (zeta, _) = viscosities(pr, delta, p);
        let zeta_x = pr_x / (2.0 * p.delta_min) * th + pr / (2.0 * p.delta_min) * (1.0 - th * th) * r_x;
        let sigma_x = k * (zeta_x * u_x + zeta * u_xx) - 0.5 * pr_x;

        let f_u = p.rho_ice * h * u_t - wind_stress(self.wind, p) + water_stress(u, p) - sigma_x;
        [f_u, f_h, f_a]
    }
}

impl SourceTerms for ManufacturedSolution {
    fn eval(&self, x: f64, t: f64) -> [f64; 3] {
        self.forcing(x, t)
    }
}

/// `|numeric - exact|_2 / |exact|_2` over grid values.
pub fn relative_l2_error(numeric: &[f64], exact: &[f64]) -> Result<f64> {
    if numeric.len() != exact.len() {
        return Err(Error::LengthMismatch {
            field: "numeric",
            got: numeric.len(),
            expected: exact.len(),
        });
    }
    let denom = exact.iter().map(|e| e * e).sum::<f64>().sqrt();
    if denom == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let num = numeric
        .iter()
        .zip(exact)
        .map(|(n, e)| (n - e) * (n - e))
        .sum::<f64>()
        .sqrt();
    Ok(num / denom)
}

/// Observed order between two successive halvings.
pub fn observed_rate(err_coarse: f64, err_fine: f64) -> f64 {
    (err_coarse / err_fine).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub dx: f64,
    pub err_u: f64,
    pub err_h: f64,
    pub err_a: f64,
    pub rate_u: Option<f64>,
    pub rate_h: Option<f64>,
    pub rate_a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyPlan {
    pub resolutions: Vec<usize>,
    pub dt: f64,
    pub horizon: f64,
    pub wind: f64,
    pub params: PhysParams,
}

impl Default for StudyPlan {
    fn default() -> Self {
        Self {
            resolutions: vec![50, 100, 200],
            dt: 1e-4,
            horizon: 5.0,
            wind: 10.0,
            params: PhysParams::default(),
        }
    }
}

/// Final-time errors of a single forced run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmsErrors {
    pub dx: f64,
    pub err_u: f64,
    pub err_h: f64,
    pub err_a: f64,
}

/// Forced run from the manufactured initial state to `horizon`.
pub fn run_manufactured(
    scheme: Scheme,
    n_cells: usize,
    dt: f64,
    horizon: f64,
    wind: f64,
    params: PhysParams,
) -> Result<(State, ModelSetup)> {
    if !(dt > 0.0 && horizon >= 0.0) {
        return Err(Error::InvalidSpec("dt must be positive and the horizon non-negative".into()));
    }
    let grid = make_grid(n_cells, MMS_LENGTH / n_cells as f64, scheme.layout(), Boundary::Periodic)?;
    let setup = ModelSetup::new(grid, params, scheme, wind)?;
    let mms = ManufacturedSolution::new(params, wind);
    let hooks = RhsHooks {
        mms_forcing: Some(&mms),
        potential: None,
    };
    let n_steps = (horizon / dt).round() as usize;
    let mut state = mms.state_on(&grid, 0.0);
    for k in 0..n_steps {
        state = tvrk3_step(&state, dt, |s| vp_rhs(s, &setup, &hooks))?;
        state.time = (k + 1) as f64 * dt;
        if let Some(index) = state.u.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { field: "u", index });
        }
    }
    Ok((state, setup))
}

/// Relative errors of `state` against the truth at `state.time`. The
/// duplicated periodic vertex is left out of the velocity norm.
pub fn errors_against_truth(state: &State, setup: &ModelSetup) -> Result<MmsErrors> {
    let grid = &setup.grid;
    let mms = ManufacturedSolution::new(setup.params, setup.wind);
    let exact = mms.state_on(grid, state.time);
    let n = grid.n_cells;
    Ok(MmsErrors {
        dx: grid.dx,
        err_u: relative_l2_error(&state.u[..n], &exact.u[..n])?,
        err_h: relative_l2_error(&state.h, &exact.h)?,
        err_a: relative_l2_error(&state.a, &exact.a)?,
    })
}

/// Successive rates down a list of runs ordered coarse to fine.
pub fn convergence_rows(errors: &[MmsErrors]) -> Vec<ConvergenceRow> {
    errors
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let prev = i.checked_sub(1).map(|j| errors[j]);
            ConvergenceRow {
                dx: e.dx,
                err_u: e.err_u,
                err_h: e.err_h,
                err_a: e.err_a,
                rate_u: prev.map(|p| observed_rate(p.err_u, e.err_u)),
                rate_h: prev.map(|p| observed_rate(p.err_h, e.err_h)),
                rate_a: prev.map(|p| observed_rate(p.err_a, e.err_a)),
            }
        })
        .collect()
}

/// Runs every resolution of `plan` on its own thread and tabulates errors
/// and rates in the order given.
pub fn convergence_study(scheme: Scheme, plan: &StudyPlan) -> Result<Vec<ConvergenceRow>> {
    let results: Vec<Result<MmsErrors>> = std::thread::scope(|scope| {
        let handles: Vec<_> = plan
            .resolutions
            .iter()
            .map(|&n| {
                scope.spawn(move || {
                    let (state, setup) =
                        run_manufactured(scheme, n, plan.dt, plan.horizon, plan.wind, plan.params)?;
                    errors_against_truth(&state, &setup)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("resolution worker panicked"))
            .collect()
    });
    let errors = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(convergence_rows(&errors))
}

pub const CONVERGENCE_HEADER: &str = "dx,err_u,err_h,err_a,rate_u,rate_h,rate_a";

/// Writes the table as CSV; rates of the coarsest row are left empty.
pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CONVERGENCE_HEADER}")?;
    let opt = |r: Option<f64>| r.map(|v| format!("{v:.16e}")).unwrap_or_default();
    for r in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
            r.dx,
            r.err_u,
            r.err_h,
            r.err_a,
            opt(r.rate_u),
            opt(r.rate_h),
            opt(r.rate_a)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn truth_examples() {
        let m = ManufacturedSolution::new(PhysParams::default(), 10.0);
        let [u, h, a] = m.truth(0.0, 0.0);
        assert_relative_eq!(u, 0.2, epsilon = 1e-15);
        assert_relative_eq!(h, 0.1, epsilon = 1e-15);
        assert_relative_eq!(a, 0.7, epsilon = 1e-15);
        let [u, h, a] = m.truth(5e5, 0.0);
        assert_relative_eq!(u, 0.201, epsilon = 1e-15);
        assert_relative_eq!(h, 1.1, epsilon = 1e-15);
        assert_relative_eq!(a, 0.85, epsilon = 1e-15);
        for x in [0.0, 3.3e5, 1.7e6] {
            let (p, q) = (m.truth(x, 12.0), m.truth(x + MMS_LENGTH, 12.0));
            for i in 0..3 {
                assert_relative_eq!(p[i], q[i], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn l2_examples() {
        assert_eq!(relative_l2_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_relative_eq!(relative_l2_error(&[2.0, 4.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_relative_eq!(relative_l2_error(&[3.0, 4.5], &[3.0, 4.0]).unwrap(), 0.1, epsilon = 1e-15);
        assert!(matches!(relative_l2_error(&[1.0], &[0.0]), Err(Error::ZeroNorm)));
        assert!(relative_l2_error(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn rates_follow_halvings() {
        let e = |dx, v| MmsErrors { dx, err_u: v, err_h: v, err_a: v };
        let rows = convergence_rows(&[e(4.0, 1.0), e(2.0, 0.25), e(1.0, 0.0625)]);
        assert!(rows[0].rate_u.is_none());
        assert_relative_eq!(rows[1].rate_h.unwrap(), 2.0);
        assert_relative_eq!(rows[2].rate_a.unwrap(), 2.0);
        let mut csv = Vec::new();
        write_convergence_csv(&rows, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with(CONVERGENCE_HEADER));
        assert!(text.lines().nth(1).unwrap().ends_with(",,,"));
    }

    #[test]
    fn wind_cancels_in_forcing() {
        let p = PhysParams::default();
        let calm = ManufacturedSolution::new(p, 0.0).forcing(1e5, 1.0);
        let windy = ManufacturedSolution::new(p, 10.0).forcing(1e5, 1.0);
        assert_relative_eq!(calm[0] - windy[0], wind_stress(10.0, &p), max_relative = 1e-12);
        assert_eq!(calm[1], windy[1]);
    }
}
