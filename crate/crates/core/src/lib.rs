//! One-dimensional viscous-plastic and elastic-viscous-plastic sea ice
//! dynamics.
//!
//! The momentum balance `rho h u_t = tau_a - tau_w + sigma_x` is coupled to
//! continuity equations for mean thickness `h` and concentration `A`.
//! Space is discretized with second-order central differences on a
//! staggered grid or fifth-order WENO on a collocated grid. Time stepping is
//! explicit TVD Runge-Kutta, backward Euler with a Newton solve, or EVP
//! subcycling.

pub mod cd;
pub mod config;
pub mod driver;
pub mod error;
pub mod evp;
pub mod explicit;
pub mod jfnk;
pub mod mms;
pub mod model;
pub mod output;
pub mod potential;
pub mod rheology;
pub mod scenario;
pub mod spatial;
pub mod weno;

pub use config::{load_config, load_config_with_overrides};
pub use driver::{simulate, RunOutcome, RunStatus, Simulation};
pub use error::{Error, Result};
pub use model::{make_grid, Boundary, Grid, Layout, PhysParams, Scheme, State};
pub use scenario::{Integrator, RunSpec, Scenario};
