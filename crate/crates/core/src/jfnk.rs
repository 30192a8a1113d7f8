//! Backward-Euler momentum solve by damped Newton iteration.
//!
//! Jacobian-vector products are one-sided finite differences of the
//! residual. In one dimension the full Jacobian is cheap to form column by
//! column from those products, so each Newton correction comes from a dense
//! LU solve instead of a Krylov iteration.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_state, Boundary, Layout, State};
use crate::rheology::{self, water_stress, wind_stress};
use crate::spatial::ModelSetup;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    pub k_max: usize,
    /// Relative residual reduction that ends the iteration.
    pub gamma_nl: f64,
    /// Perturbation size of the finite-difference Jacobian action.
    pub fd_eps: f64,
    /// Damping factors tried in order on every iteration.
    pub lambda_schedule: Vec<f64>,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            k_max: 150,
            gamma_nl: 1e-6,
            fd_eps: 1e-7,
            lambda_schedule: vec![1.0, 0.5, 0.25, 0.125],
        }
    }
}

/// Per-solve iteration history.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub iterations: usize,
    /// `|F|` before the first iteration followed by every accepted iterate.
    pub residuals: Vec<f64>,
    /// Damping factor accepted on each iteration.
    pub lambdas: Vec<f64>,
    /// Iterations where no damping factor reduced `|F|` and the last one was
    /// taken anyway.
    pub forced: Vec<usize>,
}

impl NewtonReport {
    pub fn initial_residual(&self) -> f64 {
        self.residuals.first().copied().unwrap_or(0.0)
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Backward-Euler momentum residual
/// `rho h (u - u_prev)/dt - tau_a + tau_w(u) - d sigma(u, h_prev, A_prev)/dx`
/// on every velocity slot. Pinned Dirichlet slots carry `F = u`; the periodic
/// image vertex carries `F = u_n - u_0`.
pub fn momentum_residual(u: &[f64], prev: &State, dt: f64, setup: &ModelSetup) -> Result<Vec<f64>> {
    let grid = &setup.grid;
    if u.len() != grid.velocity_slots() {
        return Err(Error::LengthMismatch {
            field: "u",
            got: u.len(),
            expected: grid.velocity_slots(),
        });
    }
    if let Some(index) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { field: "u", index });
    }
    let params = &setup.params;
    let du_dx = setup.strain_rate(u)?;
    let sigma = rheology::stress_field(&du_dx, &prev.h, &prev.a, params);
    let dsigma = setup.stress_divergence(&sigma)?;
    let mass = setup.velocity_mass(&prev.h)?;
    let tau_a = wind_stress(setup.wind, params);

    let mut f: Vec<f64> = (0..u.len())
        .map(|i| mass[i] * (u[i] - prev.u[i]) / dt - tau_a + water_stress(u[i], params) - dsigma[i])
        .collect();
    match grid.boundary {
        Boundary::DirichletZeroVelocity => {
            for (i, fi) in f.iter_mut().enumerate() {
                if setup.is_pinned(i) {
                    *fi = u[i];
                }
            }
        }
        Boundary::Periodic if grid.layout == Layout::StaggeredCGrid => {
            f[grid.n_cells] = u[grid.n_cells] - u[0];
        }
        Boundary::Periodic => {}
    }
    Ok(f)
}

/// `(F(u + eps v) - F(u)) / eps`.
pub fn jacobian_action<F>(f: &mut F, u: &[f64], v: &[f64], fd_eps: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let base = f(u)?;
    action_from(f, u, &base, v, fd_eps)
}

fn action_from<F>(f: &mut F, u: &[f64], f_u: &[f64], v: &[f64], fd_eps: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let shifted: Vec<f64> = u.iter().zip(v).map(|(x, d)| x + fd_eps * d).collect();
    let f_shift = f(&shifted)?;
    Ok(f_shift.iter().zip(f_u).map(|(a, b)| (a - b) / fd_eps).collect())
}

fn assemble_from<F>(f: &mut F, u: &[f64], f_u: &[f64], fd_eps: f64) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = u.len();
    let mut jac = DMatrix::zeros(f_u.len(), n);
    let mut shifted = u.to_vec();
    for j in 0..n {
        shifted[j] = u[j] + fd_eps;
        let f_shift = f(&shifted)?;
        shifted[j] = u[j];
        for (i, (a, b)) in f_shift.iter().zip(f_u).enumerate() {
            jac[(i, j)] = (a - b) / fd_eps;
        }
    }
    Ok(jac)
}

/// Dense Jacobian whose column `j` is the action on the unit vector `e_j`.
pub fn assemble_jacobian<F>(f: &mut F, u: &[f64], fd_eps: f64) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let base = f(u)?;
    assemble_from(f, u, &base, fd_eps)
}

/// Largest `|i - j|` over entries with magnitude above `tol`.
pub fn bandwidth(m: &DMatrix<f64>, tol: f64) -> usize {
    let mut width = 0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)].abs() > tol {
                width = width.max(i.abs_diff(j));
            }
        }
    }
    width
}

/// Damped Newton iteration on a general residual.
pub fn newton_solve<F>(mut f: F, u0: &[f64], cfg: &NewtonConfig) -> Result<(Vec<f64>, NewtonReport)>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut u = u0.to_vec();
    let mut f_u = f(&u)?;
    let initial = norm(&f_u);
    let mut report = NewtonReport {
        residuals: vec![initial],
        ..NewtonReport::default()
    };
    if initial < 1e-14 * u.len() as f64 {
        return Ok((u, report));
    }
    let target = cfg.gamma_nl * initial;
    let mut current = initial;
    let last_lambda = cfg.lambda_schedule.len().saturating_sub(1);

    for k in 1..=cfg.k_max {
        let jac = assemble_from(&mut f, &u, &f_u, cfg.fd_eps)?;
        let rhs = DVector::from_iterator(f_u.len(), f_u.iter().map(|v| -v));
        let delta = jac.lu().solve(&rhs).ok_or(Error::SingularJacobian)?;

        let mut accepted = None;
        for (idx, &lambda) in cfg.lambda_schedule.iter().enumerate() {
            let trial: Vec<f64> = u.iter().zip(delta.iter()).map(|(x, d)| x + lambda * d).collect();
            let f_trial = match f(&trial) {
                Ok(v) => v,
                Err(Error::NonFinite { .. }) if idx < last_lambda => continue,
                Err(e) => return Err(e),
            };
            let r = norm(&f_trial);
            let decreased = r < current;
            if decreased || idx == last_lambda {
                if !decreased {
                    report.forced.push(k);
                }
                accepted = Some((trial, f_trial, r, lambda));
                break;
            }
        }
        let Some((trial, f_trial, r, lambda)) = accepted else {
            return Err(Error::NonConvergence {
                iterations: k,
                residual: current,
                initial,
            });
        };
        if !r.is_finite() {
            return Err(Error::NonConvergence {
                iterations: k,
                residual: r,
                initial,
            });
        }
        u = trial;
        f_u = f_trial;
        current = r;
        report.iterations = k;
        report.residuals.push(r);
        report.lambdas.push(lambda);
        if current < target {
            return Ok((u, report));
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.k_max,
        residual: current,
        initial,
    })
}

/// Solves the backward-Euler momentum equation for the velocity at the new
/// time level, starting from the previous velocity.
pub fn jfnk_solve(
    prev: &State,
    dt: f64,
    setup: &ModelSetup,
    cfg: &NewtonConfig,
) -> Result<(Vec<f64>, NewtonReport)> {
    setup.grid.require_layout(Layout::StaggeredCGrid)?;
    validate_state(prev, &setup.grid)?;
    newton_solve(|u| momentum_residual(u, prev, dt, setup), &prev.u, cfg)
}
