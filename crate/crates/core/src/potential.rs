//! Bound preservation through potential-function forcing.
//!
//! A piecewise potential `f` vanishes on the admissible range and grows
//! outside it; the transport equation for the bounded quantity gains the
//! restoring term `-f'(q)`. Each branch (A < 0, A > 1, h < 0) switches on
//! the first time the watchdog sees its bound violated and stays on.
//!
//! The admissible interval for each coefficient comes from the Lagrangian
//! model ODE `B' = -f'(B) - a B` with `a ~ du/dx`, advanced one forward-Euler
//! step of length `dt` from the violating value `B0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PotentialForm {
    /// `gamma q^2` below the range, `gamma (q - 1)^2` above; continuous force.
    Quadratic,
    /// `-gamma q` below, `gamma (q - 1)` above; piecewise-constant force.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    ConcentrationLow,
    ConcentrationHigh,
    ThicknessLow,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::ConcentrationLow => "A<0",
            Branch::ConcentrationHigh => "A>1",
            Branch::ThicknessLow => "h<0",
        }
    }
}

/// Estimated admissible range `(lower, upper]` for a potential coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaInterval {
    pub lower: f64,
    pub upper: f64,
}

impl GammaInterval {
    pub fn is_feasible(&self) -> bool {
        self.lower < self.upper
    }

    pub fn contains(&self, gamma: f64) -> bool {
        gamma > self.lower && gamma <= self.upper
    }
}

/// Activation record of one branch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Activation {
    /// Model time of the first detected violation; `None` while inactive.
    pub time: Option<f64>,
    pub interval: Option<GammaInterval>,
}

impl Activation {
    pub fn is_active(&self) -> bool {
        self.time.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialConfig {
    /// Coefficient of the A < 0 branch, s^-1.
    pub gamma1: f64,
    /// Coefficient of the A > 1 branch, s^-1.
    pub gamma2: f64,
    /// Coefficient of the h < 0 branch, s^-1.
    pub gamma_h: f64,
    pub form: PotentialForm,
    pub a_low: Activation,
    pub a_high: Activation,
    pub h_low: Activation,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            gamma1: 1e-3,
            gamma2: 1e-2,
            gamma_h: 1e-3,
            form: PotentialForm::Quadratic,
            a_low: Activation::default(),
            a_high: Activation::default(),
            h_low: Activation::default(),
        }
    }
}

/// Restoring force `-f'(q)` for the range `[lo, hi]`; `hi = None` leaves the
/// range unbounded above.
pub fn potential_force(
    q: f64,
    lo: f64,
    hi: Option<f64>,
    g_lo: f64,
    g_hi: f64,
    form: PotentialForm,
) -> f64 {
    if q < lo {
        match form {
            PotentialForm::Quadratic => -2.0 * g_lo * (q - lo),
            PotentialForm::Linear => g_lo,
        }
    } else if let Some(hi) = hi.filter(|&hi| q > hi) {
        match form {
            PotentialForm::Quadratic => -2.0 * g_hi * (q - hi),
            PotentialForm::Linear => -g_hi,
        }
    } else {
        0.0
    }
}

impl PotentialConfig {
    pub fn activation(&self, branch: Branch) -> &Activation {
        match branch {
            Branch::ConcentrationLow => &self.a_low,
            Branch::ConcentrationHigh => &self.a_high,
            Branch::ThicknessLow => &self.h_low,
        }
    }

    fn activation_mut(&mut self, branch: Branch) -> &mut Activation {
        match branch {
            Branch::ConcentrationLow => &mut self.a_low,
            Branch::ConcentrationHigh => &mut self.a_high,
            Branch::ThicknessLow => &mut self.h_low,
        }
    }

    pub fn gamma(&self, branch: Branch) -> f64 {
        match branch {
            Branch::ConcentrationLow => self.gamma1,
            Branch::ConcentrationHigh => self.gamma2,
            Branch::ThicknessLow => self.gamma_h,
        }
    }

    /// Switches every branch on at time `t` without estimating intervals.
    pub fn activate_all(&mut self, t: f64) {
        for b in [
            Branch::ConcentrationLow,
            Branch::ConcentrationHigh,
            Branch::ThicknessLow,
        ] {
            self.activation_mut(b).time.get_or_insert(t);
        }
    }

    /// Forcing added to the concentration tendency.
    pub fn concentration_force(&self, a: f64) -> f64 {
        let g_lo = if self.a_low.is_active() { self.gamma1 } else { 0.0 };
        let g_hi = if self.a_high.is_active() { self.gamma2 } else { 0.0 };
        if (a < 0.0 && g_lo == 0.0) || (a > 1.0 && g_hi == 0.0) {
            return 0.0;
        }
        potential_force(a, 0.0, Some(1.0), g_lo, g_hi, self.form)
    }

    /// Forcing added to the thickness tendency.
    pub fn thickness_force(&self, h: f64) -> f64 {
        if !self.h_low.is_active() {
            return 0.0;
        }
        potential_force(h, 0.0, None, self.gamma_h, 0.0, self.form)
    }
}

fn lower_branch_range(values: &[f64], du_dx: &[f64], dt: f64, what: &'static str) -> Result<GammaInterval> {
    let lower = du_dx.iter().map(|a| -0.5 * a).fold(f64::NEG_INFINITY, f64::max);
    let upper = values
        .iter()
        .zip(du_dx)
        .filter(|(&b0, _)| b0 < 0.0)
        .map(|(&b0, &a)| -0.5 * a - (1.0 - b0) / (2.0 * b0 * dt))
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))))
        .ok_or(Error::NoViolation(what))?;
    Ok(GammaInterval { lower, upper })
}

/// Admissible range of the A < 0 coefficient.
///
/// `lower = max_x(-a/2)` over the whole grid; the `B0`-dependent upper bound
/// is minimized over violating cells only.
pub fn estimate_gamma1_range(a_field: &[f64], du_dx: &[f64], dt: f64) -> Result<GammaInterval> {
    lower_branch_range(a_field, du_dx, dt, "A >= 0")
}

/// Admissible range of the A > 1 coefficient, evaluated on violating cells.
pub fn estimate_gamma2_range(a_field: &[f64], du_dx: &[f64], dt: f64) -> Result<GammaInterval> {
    let mut lower: Option<f64> = None;
    let mut upper: Option<f64> = None;
    for (&b0, &a) in a_field.iter().zip(du_dx).filter(|(&b0, _)| b0 > 1.0) {
        let base = -a * b0 / (2.0 * (b0 - 1.0));
        let top = base + b0 / (2.0 * (b0 - 1.0) * dt);
        lower = Some(lower.map_or(base, |m| m.max(base)));
        upper = Some(upper.map_or(top, |m| m.min(top)));
    }
    match (lower, upper) {
        (Some(lower), Some(upper)) => Ok(GammaInterval { lower, upper }),
        _ => Err(Error::NoViolation("A <= 1")),
    }
}

/// Admissible range of the h < 0 coefficient; same analysis as A < 0.
pub fn estimate_gamma_h_range(h_field: &[f64], du_dx: &[f64], dt: f64) -> Result<GammaInterval> {
    lower_branch_range(h_field, du_dx, dt, "h >= 0")
}

/// One branch switching on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationEvent {
    pub time: f64,
    pub branch: Branch,
    pub interval: GammaInterval,
    pub gamma: f64,
    /// Set when the interval is empty or excludes the configured coefficient.
    pub warning: Option<String>,
}

/// Post-step bound check.
///
/// Every inactive branch whose bound is violated in `state` gets its interval
/// estimated and recorded, keeps its configured coefficient and becomes
/// active. Active branches are never re-estimated.
pub fn watchdog_step(
    state: &State,
    config: &PotentialConfig,
    du_dx: &[f64],
    dt: f64,
) -> (PotentialConfig, Vec<ActivationEvent>) {
    let mut next = *config;
    let mut events = Vec::new();
    type Estimator = fn(&[f64], &[f64], f64) -> Result<GammaInterval>;
    let checks: [(Branch, Estimator, &[f64]); 3] = [
        (Branch::ConcentrationLow, estimate_gamma1_range, &state.a),
        (Branch::ConcentrationHigh, estimate_gamma2_range, &state.a),
        (Branch::ThicknessLow, estimate_gamma_h_range, &state.h),
    ];
    for (branch, estimate, field) in checks {
        if config.activation(branch).is_active() {
            continue;
        }
        let Ok(interval) = estimate(field, du_dx, dt) else {
            continue;
        };
        let gamma = config.gamma(branch);
        let warning = if !interval.is_feasible() {
            Some(format!(
                "infeasible interval ({:e}, {:e}] for {}; keeping gamma = {gamma:e}",
                interval.lower,
                interval.upper,
                branch.name()
            ))
        } else if !interval.contains(gamma) {
            Some(format!(
                "gamma = {gamma:e} lies outside ({:e}, {:e}] for {}",
                interval.lower,
                interval.upper,
                branch.name()
            ))
        } else {
            None
        };
        *next.activation_mut(branch) = Activation {
            time: Some(state.time),
            interval: Some(interval),
        };
        events.push(ActivationEvent {
            time: state.time,
            branch,
            interval,
            gamma,
            warning,
        });
    }
    (next, events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const Q: PotentialForm = PotentialForm::Quadratic;

    #[test]
    fn force_examples() {
        assert_eq!(potential_force(0.5, 0.0, Some(1.0), 1e-3, 1e-2, Q), 0.0);
        assert_relative_eq!(potential_force(-0.1, 0.0, Some(1.0), 1e-3, 1e-2, Q), 2e-4, max_relative = 1e-14);
        assert_relative_eq!(potential_force(1.05, 0.0, Some(1.0), 1e-3, 1e-2, Q), -1e-3, max_relative = 1e-12);
        assert_eq!(potential_force(5.0, 0.0, None, 1e-3, 1e-2, Q), 0.0);
    }

    #[test]
    fn quadratic_is_continuous_linear_is_not() {
        let tiny = 1e-12;
        for (edge, lo_side, hi_side) in [(0.0, -tiny, tiny), (1.0, 1.0 - tiny, 1.0 + tiny)] {
            let l = potential_force(lo_side, 0.0, Some(1.0), 1e-3, 1e-2, Q);
            let r = potential_force(hi_side, 0.0, Some(1.0), 1e-3, 1e-2, Q);
            assert!(l.abs() < 1e-13 && r.abs() < 1e-13, "jump at {edge}");
        }
        let lin = PotentialForm::Linear;
        assert_eq!(potential_force(-tiny, 0.0, Some(1.0), 1e-3, 1e-2, lin), 1e-3);
        assert_eq!(potential_force(tiny, 0.0, Some(1.0), 1e-3, 1e-2, lin), 0.0);
        assert_eq!(potential_force(1.0 + tiny, 0.0, Some(1.0), 1e-3, 1e-2, lin), -1e-2);
    }

    #[test]
    fn interval_examples() {
        let a = [0.2, -0.1, 0.5];
        let zero = [0.0; 3];
        let r = estimate_gamma1_range(&a, &zero, 90.0).unwrap();
        assert_eq!(r.lower, 0.0);
        assert_relative_eq!(r.upper, 1.1 / (0.2 * 90.0), max_relative = 1e-14);
        assert_relative_eq!(r.upper, 0.0611, max_relative = 1e-3);

        let a = [0.5, 1.05, 0.9];
        let r = estimate_gamma2_range(&a, &zero, 90.0).unwrap();
        assert_eq!(r.lower, 0.0);
        assert_relative_eq!(r.upper, 1.05 / (0.1 * 90.0), max_relative = 1e-12);

        let h = [1.0, -0.01, 0.3];
        let r = estimate_gamma_h_range(&h, &zero, 90.0).unwrap();
        assert_relative_eq!(r.upper, 1.01 / (0.02 * 90.0), max_relative = 1e-12);
        assert_relative_eq!(r.upper, 0.5611, max_relative = 1e-4);

        let ok = [0.0, 0.5, 1.0];
        assert_eq!(estimate_gamma1_range(&ok, &zero, 90.0), Err(Error::NoViolation("A >= 0")));
        assert_eq!(estimate_gamma2_range(&ok, &zero, 90.0), Err(Error::NoViolation("A <= 1")));
        assert_eq!(estimate_gamma_h_range(&ok, &zero, 90.0), Err(Error::NoViolation("h >= 0")));
    }

    #[test]
    fn lower_bound_spans_all_cells() {
        let a = [0.5, -1e-5, 0.5];
        let du = [-4e-7, 1e-7, 2e-7];
        let r = estimate_gamma1_range(&a, &du, 90.0).unwrap();
        assert_eq!(r.lower, 2e-7);
        assert_relative_eq!(r.upper, -0.5e-7 + (1.0 + 1e-5) / (2.0 * 1e-5 * 90.0), max_relative = 1e-14);
    }

    fn state(a: Vec<f64>, h: Vec<f64>, t: f64) -> State {
        State { time: t, u: vec![0.0; a.len() + 1], a, h }
    }

    #[test]
    fn watchdog_activates_once() {
        let cfg = PotentialConfig::default();
        let du = [0.0; 4];

        let (same, ev) = watchdog_step(&state(vec![0.5; 4], vec![1.0; 4], 10.0), &cfg, &du, 90.0);
        assert_eq!(same, cfg);
        assert!(ev.is_empty());

        let (cfg, ev) = watchdog_step(&state(vec![0.5, -0.01, 0.5, 0.5], vec![1.0; 4], 20.0), &cfg, &du, 90.0);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].branch, Branch::ConcentrationLow);
        assert_eq!(cfg.a_low.time, Some(20.0));
        assert_eq!(cfg.gamma1, 1e-3);
        assert!(cfg.a_low.interval.is_some());
        assert!(!cfg.a_high.is_active());

        let (again, ev) = watchdog_step(&state(vec![-0.3; 4], vec![1.0; 4], 30.0), &cfg, &du, 90.0);
        assert!(ev.is_empty());
        assert_eq!(again, cfg);
    }

    #[test]
    fn watchdog_flags_gamma_outside_interval() {
        let cfg = PotentialConfig { gamma1: 10.0, ..PotentialConfig::default() };
        let (_, ev) = watchdog_step(&state(vec![-0.1, 0.5, 0.5, 0.5], vec![1.0; 4], 0.0), &cfg, &[0.0; 4], 90.0);
        assert!(ev[0].warning.is_some());
    }

    #[test]
    fn inactive_branches_contribute_nothing() {
        let cfg = PotentialConfig::default();
        assert_eq!(cfg.concentration_force(-0.5), 0.0);
        assert_eq!(cfg.thickness_force(-0.5), 0.0);
        let mut on = cfg;
        on.activate_all(0.0);
        assert_eq!(on.concentration_force(0.5), 0.0);
        assert!(on.concentration_force(-0.5) > 0.0);
        assert!(on.concentration_force(1.5) < 0.0);
        assert!(on.thickness_force(-0.5) > 0.0);
        assert_eq!(on.thickness_force(3.0), 0.0);
    }

    /// Scalar model ODE `B' = -2 g B - a B` advanced with the same three-stage
    /// scheme used for transport.
    fn rk3(b: f64, dt: f64, rate: impl Fn(f64) -> f64) -> f64 {
        let b1 = b + dt * rate(b);
        let b2 = 0.75 * b + 0.25 * (b1 + dt * rate(b1));
        b / 3.0 + 2.0 / 3.0 * (b2 + dt * rate(b2))
    }

    proptest! {
        #[test]
        fn restoring_sign(q in -5.0f64..5.0) {
            let mut cfg = PotentialConfig::default();
            cfg.activate_all(0.0);
            let fa = cfg.concentration_force(q);
            let fh = cfg.thickness_force(q);
            if q < 0.0 { prop_assert!(fa > 0.0 && fh > 0.0); }
            if q > 1.0 { prop_assert!(fa < 0.0); }
            if (0.0..=1.0).contains(&q) { prop_assert_eq!(fa, 0.0); }
            if q >= 0.0 { prop_assert_eq!(fh, 0.0); }
        }

        #[test]
        fn model_ode_increases_monotonically(
            a in -1e-3f64..1e-3, excess in 1e-6f64..1e-3, b0 in -0.5f64..-1e-6,
        ) {
            let gamma = -a / 2.0 + excess;
            let dt = 10.0;
            let mut b = b0;
            for _ in 0..50 {
                let next = rk3(b, dt, |x| -2.0 * gamma * x - a * x);
                prop_assert!(next > b, "{next} <= {b}");
                b = next;
            }
        }
    }
}
