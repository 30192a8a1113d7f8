//! Semidiscrete viscous-plastic right-hand side and the three-stage TVD
//! Runge-Kutta integrator.

use crate::error::Result;
use crate::model::{validate_state, Boundary, Layout, State};
use crate::potential::PotentialConfig;
use crate::rheology::{self, water_stress, wind_stress};
use crate::spatial::{ModelSetup, H_FLOOR};

/// Time derivatives of `(u, h, A)`, laid out like [`State`].
#[derive(Debug, Clone, PartialEq)]
pub struct Tendencies {
    pub u: Vec<f64>,
    pub h: Vec<f64>,
    pub a: Vec<f64>,
}

/// Extra source terms `(F_u, F_h, F_A)` evaluated at a point in space-time.
/// `F_u` is a force per unit area and is divided by the ice mass along with
/// the other momentum terms.
pub trait SourceTerms: Sync {
    fn eval(&self, x: f64, t: f64) -> [f64; 3];
}

/// Optional additions to the right-hand side.
#[derive(Clone, Copy, Default)]
pub struct RhsHooks<'a> {
    /// Evaluated at `state.time`. Runge-Kutta stage states keep the time of
    /// the step they started from, so the forcing is frozen over a step.
    pub mms_forcing: Option<&'a dyn SourceTerms>,
    pub potential: Option<&'a PotentialConfig>,
}

/// Tendencies of the coupled momentum and transport equations.
pub fn vp_rhs(state: &State, setup: &ModelSetup, hooks: &RhsHooks<'_>) -> Result<Tendencies> {
    let grid = &setup.grid;
    grid.require_scheme(setup.scheme)?;
    validate_state(state, grid)?;
    let params = &setup.params;

    let du_dx = setup.strain_rate(&state.u)?;
    let sigma = rheology::stress_field(&du_dx, &state.h, &state.a, params);
    let dsigma = setup.stress_divergence(&sigma)?;
    let mass = setup.velocity_mass(&state.h)?;
    let tau_a = wind_stress(setup.wind, params);

    let mut du: Vec<f64> = (0..state.u.len())
        .map(|i| (tau_a - water_stress(state.u[i], params) + dsigma[i]) / mass[i])
        .collect();

    let mut dh = setup.transport_divergence(&state.u, &state.h)?;
    let mut da = setup.transport_divergence(&state.u, &state.a)?;
    dh.iter_mut().for_each(|v| *v = -*v);
    da.iter_mut().for_each(|v| *v = -*v);

    if let Some(src) = hooks.mms_forcing {
        let t = state.time;
        for (i, d) in du.iter_mut().enumerate() {
            *d += src.eval(grid.velocity_x(i), t)[0] / mass[i];
        }
        for j in 0..grid.n_cells {
            let [_, fh, fa] = src.eval(grid.center_x(j), t);
            dh[j] += fh;
            da[j] += fa;
        }
    }
    if let Some(pot) = hooks.potential {
        add_potential(pot, state, &mut dh, &mut da);
    }

    finish_velocity_tendency(setup, &mut du);
    Ok(Tendencies { u: du, h: dh, a: da })
}

fn add_potential(pot: &PotentialConfig, state: &State, dh: &mut [f64], da: &mut [f64]) {
    for (d, &h) in dh.iter_mut().zip(&state.h) {
        *d += pot.thickness_force(h);
    }
    for (d, &a) in da.iter_mut().zip(&state.a) {
        *d += pot.concentration_force(a);
    }
}

/// Zeroes pinned slots and keeps the periodic image vertex in sync.
fn finish_velocity_tendency(setup: &ModelSetup, du: &mut [f64]) {
    let grid = &setup.grid;
    match grid.boundary {
        Boundary::DirichletZeroVelocity => {
            for (i, d) in du.iter_mut().enumerate() {
                if setup.is_pinned(i) {
                    *d = 0.0;
                }
            }
        }
        Boundary::Periodic if grid.layout == Layout::StaggeredCGrid => du[grid.n_cells] = du[0],
        Boundary::Periodic => {}
    }
}

/// Tendencies of the transport equations only, for a fixed velocity.
pub fn transport_rhs(state: &State, setup: &ModelSetup, hooks: &RhsHooks<'_>) -> Result<Tendencies> {
    let mut dh = setup.transport_divergence(&state.u, &state.h)?;
    let mut da = setup.transport_divergence(&state.u, &state.a)?;
    dh.iter_mut().for_each(|v| *v = -*v);
    da.iter_mut().for_each(|v| *v = -*v);
    if let Some(src) = hooks.mms_forcing {
        for j in 0..setup.grid.n_cells {
            let [_, fh, fa] = src.eval(setup.grid.center_x(j), state.time);
            dh[j] += fh;
            da[j] += fa;
        }
    }
    if let Some(pot) = hooks.potential {
        add_potential(pot, state, &mut dh, &mut da);
    }
    Ok(Tendencies {
        u: vec![0.0; state.u.len()],
        h: dh,
        a: da,
    })
}

/// A vector space the Runge-Kutta stages can be formed in.
pub trait RkState: Sized {
    type Rate;
    /// `self + dt * rate`.
    fn advance(&self, rate: &Self::Rate, dt: f64) -> Self;
    /// `(1 - w) self + w other`, formed as `self + w (other - self)` so that
    /// equal arguments reproduce `self` bit for bit. Keeps the clock of `self`.
    fn toward(&self, other: &Self, w: f64) -> Self;
    fn advance_clock(&mut self, _dt: f64) {}
}

impl RkState for f64 {
    type Rate = f64;
    fn advance(&self, rate: &f64, dt: f64) -> f64 {
        self + dt * rate
    }
    fn toward(&self, other: &f64, w: f64) -> f64 {
        self + w * (other - self)
    }
}

impl RkState for Vec<f64> {
    type Rate = Vec<f64>;
    fn advance(&self, rate: &Vec<f64>, dt: f64) -> Self {
        self.iter().zip(rate).map(|(x, r)| x + dt * r).collect()
    }
    fn toward(&self, other: &Self, w: f64) -> Self {
        self.iter().zip(other).map(|(x, y)| x + w * (y - x)).collect()
    }
}

impl RkState for State {
    type Rate = Tendencies;
    fn advance(&self, rate: &Tendencies, dt: f64) -> Self {
        State {
            time: self.time,
            u: self.u.advance(&rate.u, dt),
            h: self.h.advance(&rate.h, dt),
            a: self.a.advance(&rate.a, dt),
        }
    }
    fn toward(&self, other: &Self, w: f64) -> Self {
        State {
            time: self.time,
            u: self.u.toward(&other.u, w),
            h: self.h.toward(&other.h, w),
            a: self.a.toward(&other.a, w),
        }
    }
    fn advance_clock(&mut self, dt: f64) {
        self.time += dt;
    }
}

/// One step of the three-stage TVD Runge-Kutta scheme:
///
/// ```text
/// u1   = un + dt L(un)
/// u2   = 3/4 un + 1/4 (u1 + dt L(u1))
/// un+1 = 1/3 un + 2/3 (u2 + dt L(u2))
/// ```
pub fn tvrk3_step<S, E>(
    state: &S,
    dt: f64,
    mut rhs: impl FnMut(&S) -> std::result::Result<S::Rate, E>,
) -> std::result::Result<S, E>
where
    S: RkState,
{
    let u1 = state.advance(&rhs(state)?, dt);
    let u2 = state.toward(&u1.advance(&rhs(&u1)?, dt), 0.25);
    let mut next = state.toward(&u2.advance(&rhs(&u2)?, dt), 2.0 / 3.0);
    next.advance_clock(dt);
    Ok(next)
}

/// Largest explicit diffusion number `(zeta + eta) dt / (rho h dx^2)` over
/// the grid, with the mass floor applied.
pub fn diffusion_number(state: &State, setup: &ModelSetup, dt: f64) -> Result<f64> {
    let du_dx = setup.strain_rate(&state.u)?;
    let fields = rheology::rheology_fields(&du_dx, &state.h, &state.a, &setup.params);
    let dx2 = setup.grid.dx * setup.grid.dx;
    Ok(fields
        .zeta
        .iter()
        .zip(&fields.eta)
        .zip(&state.h)
        .map(|((z, e), h)| (z + e) * dt / (setup.params.rho_ice * h.max(H_FLOOR) * dx2))
        .fold(0.0, f64::max))
}

/// Runs an explicit TVRK3 configuration to its horizon.
pub fn run_explicit(spec: &crate::scenario::RunSpec) -> Result<crate::driver::RunOutcome> {
    if spec.integrator != crate::scenario::Integrator::Tvrk3Explicit {
        return Err(crate::error::Error::InvalidSpec(
            "run_explicit needs the tvrk3 integrator".into(),
        ));
    }
    crate::driver::simulate(spec)
}
