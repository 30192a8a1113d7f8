//! Run specifications and the built-in experiment setups.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evp::EvpConfig;
use crate::jfnk::NewtonConfig;
use crate::mms::{ManufacturedSolution, MMS_LENGTH};
use crate::model::{make_grid, Boundary, Grid, PhysParams, Scheme, State};
use crate::potential::PotentialConfig;
use crate::spatial::ModelSetup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    Mms,
    SharpVp,
    SharpEvp,
    PotentialDirichlet,
    Custom,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Mms => "mms",
            Scenario::SharpVp => "sharp_vp",
            Scenario::SharpEvp => "sharp_evp",
            Scenario::PotentialDirichlet => "potential_dirichlet",
            Scenario::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "mms" => Scenario::Mms,
            "sharp_vp" => Scenario::SharpVp,
            "sharp_evp" => Scenario::SharpEvp,
            "potential_dirichlet" => Scenario::PotentialDirichlet,
            "custom" => Scenario::Custom,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrator {
    Tvrk3Explicit,
    /// Backward-Euler momentum by JFNK, then TVRK3 transport.
    BackwardEulerJfnk,
    /// Subcycled EVP momentum, then TVRK3 transport.
    Evp,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::Tvrk3Explicit => "tvrk3",
            Integrator::BackwardEulerJfnk => "jfnk",
            Integrator::Evp => "evp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "tvrk3" | "explicit" => Integrator::Tvrk3Explicit,
            "jfnk" | "backward_euler" => Integrator::BackwardEulerJfnk,
            "evp" => Integrator::Evp,
            _ => return None,
        })
    }
}

/// Thin ice in the middle of the domain, thick ice elsewhere, ice at rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpInitialCondition {
    pub thin_h: f64,
    pub thick_h: f64,
    pub thin_a: f64,
    pub thick_a: f64,
    pub thin_from: f64,
    pub thin_to: f64,
}

impl Default for SharpInitialCondition {
    fn default() -> Self {
        Self {
            thin_h: 0.01,
            thick_h: 2.0,
            thin_a: 0.0,
            thick_a: 0.8,
            thin_from: 400e3,
            thin_to: 1600e3,
        }
    }
}

impl SharpInitialCondition {
    /// A point on a jump takes the value on its left.
    pub fn is_thin(&self, x: f64) -> bool {
        x > self.thin_from && x <= self.thin_to
    }

    pub fn state(&self, grid: &Grid) -> State {
        let mut s = State::zeros(grid);
        for (j, x) in grid.centers().into_iter().enumerate() {
            let thin = self.is_thin(x);
            s.h[j] = if thin { self.thin_h } else { self.thick_h };
            s.a[j] = if thin { self.thin_a } else { self.thick_a };
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitialCondition {
    Sharp(SharpInitialCondition),
    Uniform { u: f64, h: f64, a: f64 },
    Manufactured,
}

/// Everything a run needs. Fully deterministic: there is no seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub scenario: Scenario,
    pub scheme: Scheme,
    pub integrator: Integrator,
    pub n_cells: usize,
    /// m
    pub dx: f64,
    pub boundary: Boundary,
    /// s
    pub dt: f64,
    /// s
    pub horizon: f64,
    /// Uniform surface wind, m/s.
    pub wind: f64,
    pub params: PhysParams,
    pub evp: EvpConfig,
    pub newton: NewtonConfig,
    pub potential: Option<PotentialConfig>,
    /// Snapshot spacing in model seconds; zero keeps only the first and
    /// last states.
    pub snapshot_every: f64,
    /// EVP steps starting inside this window get a per-subcycle velocity
    /// trace.
    pub trace_window: Option<(f64, f64)>,
    pub initial: InitialCondition,
    /// Cell counts of a manufactured-solution study.
    pub resolutions: Vec<usize>,
}

impl RunSpec {
    pub fn for_scenario(scenario: Scenario) -> Self {
        let base = RunSpec {
            scenario,
            scheme: Scheme::Cd,
            integrator: Integrator::Tvrk3Explicit,
            n_cells: 200,
            dx: 10e3,
            boundary: Boundary::Periodic,
            dt: 1.0,
            horizon: 3600.0,
            wind: 10.0,
            params: PhysParams::default(),
            evp: EvpConfig::default(),
            newton: NewtonConfig::default(),
            potential: None,
            snapshot_every: 60.0,
            trace_window: None,
            initial: InitialCondition::Sharp(SharpInitialCondition::default()),
            resolutions: Vec::new(),
        };
        match scenario {
            Scenario::SharpVp => RunSpec {
                scheme: Scheme::Weno,
                ..base
            },
            Scenario::SharpEvp => RunSpec {
                scheme: Scheme::Weno,
                integrator: Integrator::Evp,
                dt: 10.0,
                ..base
            },
            Scenario::PotentialDirichlet => RunSpec {
                integrator: Integrator::BackwardEulerJfnk,
                n_cells: 100,
                dx: 20e3,
                boundary: Boundary::DirichletZeroVelocity,
                dt: 90.0,
                horizon: 6.0 * 86400.0,
                snapshot_every: 3600.0,
                initial: InitialCondition::Uniform { u: 0.0, h: 1.0, a: 0.9 },
                ..base
            },
            Scenario::Mms => RunSpec {
                n_cells: 50,
                dx: MMS_LENGTH / 50.0,
                dt: 1e-4,
                horizon: 5.0,
                snapshot_every: 0.0,
                initial: InitialCondition::Manufactured,
                resolutions: vec![50, 100, 200],
                ..base
            },
            Scenario::Custom => RunSpec {
                n_cells: 100,
                dx: 20e3,
                initial: InitialCondition::Uniform { u: 0.0, h: 1.0, a: 0.9 },
                ..base
            },
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        make_grid(self.n_cells, self.dx, self.scheme.layout(), self.boundary)
    }

    pub fn setup(&self) -> Result<ModelSetup> {
        ModelSetup::new(self.grid()?, self.params, self.scheme, self.wind)
    }

    pub fn initial_state(&self) -> Result<State> {
        let grid = self.grid()?;
        Ok(match self.initial {
            InitialCondition::Sharp(ic) => ic.state(&grid),
            InitialCondition::Uniform { u, h, a } => State::uniform(&grid, u, h, a),
            InitialCondition::Manufactured => {
                ManufacturedSolution::new(self.params, self.wind).state_on(&grid, 0.0)
            }
        })
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    /// Checks combinations that cannot run, before anything is stepped.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return bad("horizon must be non-negative");
        }
        if !self.wind.is_finite() {
            return bad("wind must be finite");
        }
        if !(self.snapshot_every.is_finite() && self.snapshot_every >= 0.0) {
            return bad("snapshot_every must be non-negative");
        }
        if let Some((a, b)) = self.trace_window {
            if a.partial_cmp(&b).is_none_or(|o| o.is_gt()) {
                return bad("trace window must be ordered");
            }
        }
        self.setup()?;
        self.evp.validate()?;
        if self.newton.k_max == 0 || self.newton.lambda_schedule.is_empty() {
            return bad("Newton needs k_max >= 1 and a damping schedule");
        }
        if self.integrator == Integrator::BackwardEulerJfnk && self.scheme != Scheme::Cd {
            return bad("the jfnk integrator uses the cd scheme");
        }
        if self.scenario == Scenario::Mms || self.initial == InitialCondition::Manufactured {
            if self.boundary != Boundary::Periodic || self.integrator != Integrator::Tvrk3Explicit {
                return bad("manufactured runs are periodic and use tvrk3");
            }
            let length = self.n_cells as f64 * self.dx;
            if (length - MMS_LENGTH).abs() > 1e-6 * MMS_LENGTH {
                return bad("manufactured runs need n_cells * dx = 2000 km");
            }
            if self.resolutions.iter().any(|&n| n < crate::model::MIN_CELLS) {
                return bad("study resolutions must have at least 8 cells");
            }
        }
        Ok(())
    }
}
