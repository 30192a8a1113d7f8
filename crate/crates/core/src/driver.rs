//! Time loop shared by every integrator: stepping, blow-up detection,
//! watchdog, snapshots and run statistics.

use serde::{Deserialize, Serialize};

use crate::cd;
use crate::error::{Error, Result};
use crate::evp::{evp_step, initial_stress, SubcycleStats};
use crate::explicit::{diffusion_number, transport_rhs, tvrk3_step, vp_rhs, RhsHooks};
use crate::jfnk::{jfnk_solve, NewtonReport};
use crate::mms::ManufacturedSolution;
use crate::model::{validate_state, Boundary, Layout, State};
use crate::potential::{watchdog_step, ActivationEvent, PotentialConfig};
use crate::scenario::{InitialCondition, Integrator, RunSpec};
use crate::spatial::ModelSetup;

/// Per-subcycle velocity range of a traced EVP step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// Start time of the enclosing step, s.
    pub time: f64,
    pub subcycle: usize,
    pub min_u: f64,
    pub max_u: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub newton: Option<NewtonReport>,
    pub subcycle: Option<SubcycleStats>,
    pub trace: Vec<TraceRow>,
    pub events: Vec<ActivationEvent>,
}

/// A run being stepped. Failed steps leave the state at the last finite
/// time level.
pub struct Simulation {
    spec: RunSpec,
    setup: ModelSetup,
    state: State,
    sigma: Option<Vec<f64>>,
    /// Watchdog state. Without a configured potential the branches still
    /// record their first violation but never force the equations.
    watch: PotentialConfig,
    forcing: bool,
    mms: Option<ManufacturedSolution>,
    steps_taken: usize,
    last_trace: Vec<TraceRow>,
}

impl Simulation {
    pub fn new(spec: &RunSpec) -> Result<Self> {
        spec.validate()?;
        let setup = spec.setup()?;
        let state = spec.initial_state()?;
        validate_state(&state, &setup.grid)?;
        let sigma = match spec.integrator {
            Integrator::Evp => Some(initial_stress(&state, &setup)?),
            _ => None,
        };
        let mms = (spec.initial == InitialCondition::Manufactured)
            .then(|| ManufacturedSolution::new(spec.params, spec.wind));
        Ok(Self {
            spec: spec.clone(),
            setup,
            state,
            sigma,
            watch: spec.potential.unwrap_or_default(),
            forcing: spec.potential.is_some(),
            mms,
            steps_taken: 0,
            last_trace: Vec::new(),
        })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn setup(&self) -> &ModelSetup {
        &self.setup
    }

    pub fn spec(&self) -> &RunSpec {
        &self.spec
    }

    /// The potential configuration in force, with its activation records.
    pub fn potential(&self) -> Option<&PotentialConfig> {
        self.forcing.then_some(&self.watch)
    }

    /// Activation records, kept whether or not the potential is applied.
    pub fn watchdog(&self) -> &PotentialConfig {
        &self.watch
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    /// Prognostic EVP stress, when the integrator carries one.
    pub fn stress(&self) -> Option<&[f64]> {
        self.sigma.as_deref()
    }

    /// Per-subcycle velocity range of the most recent EVP step, including a
    /// step that failed part way.
    pub fn last_trace(&self) -> &[TraceRow] {
        &self.last_trace
    }

    /// Advances one step of length `spec.dt`.
    pub fn step(&mut self) -> Result<StepReport> {
        let dt = self.spec.dt;
        let setup = &self.setup;
        let hooks = RhsHooks {
            mms_forcing: self.mms.as_ref().map(|m| m as _),
            potential: self.forcing.then_some(&self.watch),
        };
        let mut report = StepReport::default();
        let mut next = match self.spec.integrator {
            Integrator::Tvrk3Explicit => tvrk3_step(&self.state, dt, |s| vp_rhs(s, setup, &hooks))?,
            Integrator::BackwardEulerJfnk => {
                let (u, rep) = jfnk_solve(&self.state, dt, setup, &self.spec.newton)?;
                report.newton = Some(rep);
                let moved = State {
                    u,
                    ..self.state.clone()
                };
                tvrk3_step(&moved, dt, |s| transport_rhs(s, setup, &hooks))?
            }
            Integrator::Evp => {
                let mut sigma = self.sigma.clone().expect("EVP stress is initialized");
                let traced = self
                    .spec
                    .trace_window
                    .is_some_and(|(a, b)| self.state.time >= a && self.state.time <= b);
                let t0 = self.state.time;
                let trace = &mut self.last_trace;
                trace.clear();
                let mut record = |s: usize, u: &[f64]| {
                    let (lo, hi) = u
                        .iter()
                        .filter(|v| v.is_finite())
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                    trace.push(TraceRow {
                        time: t0,
                        subcycle: s,
                        min_u: lo,
                        max_u: hi,
                    });
                };
                let result = evp_step(&self.state, dt, &self.spec.evp, setup, &mut sigma, &hooks, Some(&mut record));
                if traced {
                    report.trace = self.last_trace.clone();
                }
                let (next, stats) = result?;
                report.subcycle = Some(stats);
                self.sigma = Some(sigma);
                next
            }
        };
        next.time = (self.steps_taken + 1) as f64 * dt;
        if let Some(e) = first_non_finite(&next) {
            return Err(e);
        }
        let du_dx = watchdog_strain_rate(&next.u, setup)?;
        let (updated, mut events) = watchdog_step(&next, &self.watch, &du_dx, dt);
        if !self.forcing {
            events.iter_mut().for_each(|e| e.warning = None);
        }
        self.watch = updated;
        report.events = events;
        self.state = next;
        self.steps_taken += 1;
        Ok(report)
    }
}

fn first_non_finite(s: &State) -> Option<Error> {
    for (field, values) in [("u", &s.u), ("h", &s.h), ("A", &s.a)] {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Some(Error::NonFinite { field, index });
        }
    }
    None
}

/// Strain rate seen by the potential watchdog: the CD gradient on staggered
/// grids and a centered difference on collocated ones.
pub fn watchdog_strain_rate(u: &[f64], setup: &ModelSetup) -> Result<Vec<f64>> {
    let grid = &setup.grid;
    match grid.layout {
        Layout::StaggeredCGrid => cd::cd_center_gradient(u, grid.dx),
        Layout::Collocated => {
            let n = u.len();
            Ok((0..n)
                .map(|j| match grid.boundary {
                    Boundary::Periodic => (u[(j + 1) % n] - u[(j + n - 1) % n]) / (2.0 * grid.dx),
                    Boundary::DirichletZeroVelocity => {
                        let (l, r) = (j.saturating_sub(1), (j + 1).min(n - 1));
                        (u[r] - u[l]) / ((r - l) as f64 * grid.dx)
                    }
                })
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunStatus {
    Completed { time: f64 },
    /// Non-finite values appeared in the step ending at `detected_at`.
    BlowUp { detected_at: f64, last_finite: f64, message: String },
    NonConvergence { time: f64, message: String },
}

/// Running bounds of the fields over every finite time level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrema {
    pub min_u: f64,
    pub max_u: f64,
    pub min_h: f64,
    pub max_h: f64,
    pub min_a: f64,
    pub max_a: f64,
}

impl Extrema {
    pub fn of(s: &State) -> Self {
        let mut e = Self {
            min_u: f64::INFINITY,
            max_u: f64::NEG_INFINITY,
            min_h: f64::INFINITY,
            max_h: f64::NEG_INFINITY,
            min_a: f64::INFINITY,
            max_a: f64::NEG_INFINITY,
        };
        e.include(s);
        e
    }

    pub fn include(&mut self, s: &State) {
        let fold = |v: &[f64], lo: &mut f64, hi: &mut f64| {
            for &x in v {
                *lo = lo.min(x);
                *hi = hi.max(x);
            }
        };
        fold(&s.u, &mut self.min_u, &mut self.max_u);
        fold(&s.h, &mut self.min_h, &mut self.max_h);
        fold(&s.a, &mut self.min_a, &mut self.max_a);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonRecord {
    pub step: usize,
    /// End time of the step, s.
    pub time: f64,
    pub report: NewtonReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub steps: usize,
    /// Last finite state.
    pub final_state: State,
    pub snapshots: Vec<State>,
    pub extrema: Extrema,
    pub events: Vec<ActivationEvent>,
    pub newton: Vec<NewtonRecord>,
    pub subcycles: Vec<SubcycleStats>,
    pub trace: Vec<TraceRow>,
    pub warnings: Vec<String>,
}

impl RunOutcome {
    pub fn completed(&self) -> bool {
        matches!(self.status, RunStatus::Completed { .. })
    }

    pub fn blow_up_time(&self) -> Option<f64> {
        match self.status {
            RunStatus::BlowUp { detected_at, .. } => Some(detected_at),
            _ => None,
        }
    }
}

/// Steps `spec` to its horizon or to the first failure.
pub fn simulate(spec: &RunSpec) -> Result<RunOutcome> {
    let mut sim = Simulation::new(spec)?;
    let n_steps = spec.n_steps();
    let cadence = if spec.snapshot_every > 0.0 {
        ((spec.snapshot_every / spec.dt).round() as usize).max(1)
    } else {
        usize::MAX
    };
    let mut out = RunOutcome {
        status: RunStatus::Completed { time: 0.0 },
        steps: 0,
        final_state: sim.state().clone(),
        snapshots: vec![sim.state().clone()],
        extrema: Extrema::of(sim.state()),
        events: Vec::new(),
        newton: Vec::new(),
        subcycles: Vec::new(),
        trace: Vec::new(),
        warnings: Vec::new(),
    };
    let mut cfl_warned = false;
    let mut check_cfl = |sim: &Simulation, warnings: &mut Vec<String>| -> Result<()> {
        if spec.integrator != Integrator::Tvrk3Explicit || cfl_warned {
            return Ok(());
        }
        let d = diffusion_number(sim.state(), sim.setup(), spec.dt)?;
        if d > 0.5 {
            cfl_warned = true;
            warnings.push(format!(
                "explicit diffusion number {d:.3e} exceeds 0.5 at t = {} s",
                sim.state().time
            ));
        }
        Ok(())
    };
    check_cfl(&sim, &mut out.warnings)?;

    for k in 0..n_steps {
        let t = sim.state().time;
        let report = match sim.step() {
            Ok(r) => r,
            Err(e @ Error::NonFinite { .. }) => {
                // The subcycles leading up to the failure are always kept.
                out.trace.extend_from_slice(sim.last_trace());
                out.status = RunStatus::BlowUp {
                    detected_at: t + spec.dt,
                    last_finite: t,
                    message: e.to_string(),
                };
                break;
            }
            Err(e @ (Error::NonConvergence { .. } | Error::SingularJacobian)) => {
                out.status = RunStatus::NonConvergence {
                    time: t,
                    message: e.to_string(),
                };
                break;
            }
            Err(e) => return Err(e),
        };
        let state = sim.state();
        out.extrema.include(state);
        if let Some(rep) = report.newton {
            out.newton.push(NewtonRecord {
                step: k + 1,
                time: state.time,
                report: rep,
            });
        }
        out.subcycles.extend(report.subcycle);
        out.trace.extend(report.trace);
        for ev in report.events {
            if let Some(w) = &ev.warning {
                out.warnings.push(w.clone());
            }
            out.events.push(ev);
        }
        if (k + 1) % cadence == 0 {
            out.snapshots.push(state.clone());
            check_cfl(&sim, &mut out.warnings)?;
        }
    }

    out.steps = sim.steps_taken();
    out.final_state = sim.state().clone();
    if out.snapshots.last().map(|s| s.time) != Some(out.final_state.time) {
        out.snapshots.push(out.final_state.clone());
    }
    if let RunStatus::Completed { time } = &mut out.status {
        *time = out.final_state.time;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    fn short(scenario: Scenario, steps: usize) -> RunSpec {
        let mut s = RunSpec::for_scenario(scenario);
        s.horizon = steps as f64 * s.dt;
        s
    }

    #[test]
    fn snapshots_follow_cadence() {
        let mut spec = short(Scenario::SharpVp, 120);
        spec.scheme = crate::model::Scheme::Cd;
        let out = simulate(&spec).unwrap();
        assert!(out.completed());
        let times: Vec<f64> = out.snapshots.iter().map(|s| s.time).collect();
        assert_eq!(times, vec![0.0, 60.0, 120.0]);
        assert_eq!(out.steps, 120);
    }

    #[test]
    fn runs_are_bitwise_deterministic() {
        let spec = short(Scenario::SharpEvp, 2);
        let a = simulate(&RunSpec { evp: crate::evp::EvpConfig { n_sub: 50, ..spec.evp }, ..spec.clone() }).unwrap();
        let b = simulate(&RunSpec { evp: crate::evp::EvpConfig { n_sub: 50, ..spec.evp }, ..spec }).unwrap();
        assert_eq!(a.final_state, b.final_state);
        assert_eq!(a.subcycles.len(), 2);
    }

    #[test]
    fn jfnk_steps_record_newton_reports() {
        let spec = short(Scenario::PotentialDirichlet, 3);
        let out = simulate(&spec).unwrap();
        assert_eq!(out.newton.len(), 3);
        assert!(out.newton.iter().all(|r| r.report.final_residual() <= 1e-6 * r.report.initial_residual() || r.report.iterations == 0));
        assert_eq!(out.final_state.u[0], 0.0);
        assert_eq!(out.final_state.u[100], 0.0);
    }

    #[test]
    fn periodic_transport_conserves_mass() {
        for scheme in [crate::model::Scheme::Cd, crate::model::Scheme::Weno] {
            let mut spec = short(Scenario::SharpVp, 200);
            spec.scheme = scheme;
            let mut sim = Simulation::new(&spec).unwrap();
            let m0: f64 = sim.state().h.iter().sum();
            let a0: f64 = sim.state().a.iter().sum();
            for _ in 0..200 {
                sim.step().unwrap();
            }
            let m1: f64 = sim.state().h.iter().sum();
            let a1: f64 = sim.state().a.iter().sum();
            assert!(((m1 - m0) / m0).abs() < 1e-10, "{scheme}");
            assert!(((a1 - a0) / a0).abs() < 1e-10, "{scheme}");
        }
    }
}
