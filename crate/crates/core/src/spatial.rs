//! Scheme-dispatched spatial operators shared by the explicit, implicit and
//! EVP drivers.

use crate::cd;
use crate::error::{Error, Result};
use crate::model::{Boundary, Grid, Layout, PhysParams, Scheme};
use crate::weno::{self, Bias, WenoConfig};

/// Lower bound on the thickness used in the `rho h` mass factor, m.
pub const H_FLOOR: f64 = 1e-6;

/// Everything the spatial discretization needs besides the fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSetup {
    pub grid: Grid,
    pub params: PhysParams,
    pub scheme: Scheme,
    /// Uniform surface wind, m/s.
    pub wind: f64,
}

impl ModelSetup {
    pub fn new(grid: Grid, params: PhysParams, scheme: Scheme, wind: f64) -> Result<Self> {
        grid.require_scheme(scheme)?;
        if scheme != Scheme::Cd && grid.boundary != Boundary::Periodic {
            return Err(Error::UnsupportedBoundary("WENO"));
        }
        params.validate()?;
        Ok(Self {
            grid,
            params,
            scheme,
            wind,
        })
    }

    pub fn weno_config(&self) -> WenoConfig {
        match self.scheme {
            Scheme::WenoLinear => WenoConfig::linear(),
            _ => WenoConfig::default(),
        }
    }

    /// `du/dx` at cell centers.
    pub fn strain_rate(&self, u: &[f64]) -> Result<Vec<f64>> {
        match self.scheme {
            Scheme::Cd => cd::cd_center_gradient(u, self.grid.dx),
            _ => weno::weno_derivative(
                u,
                Bias::Left,
                self.grid.dx,
                &self.weno_config(),
                self.grid.boundary,
            ),
        }
    }

    /// `d sigma/dx` on the velocity slots.
    pub fn stress_divergence(&self, sigma: &[f64]) -> Result<Vec<f64>> {
        match self.scheme {
            Scheme::Cd => cd::cd_vertex_divergence(sigma, self.grid.dx, self.grid.boundary),
            _ => weno::weno_derivative(
                sigma,
                Bias::Right,
                self.grid.dx,
                &self.weno_config(),
                self.grid.boundary,
            ),
        }
    }

    /// `d(u q)/dx` at cell centers.
    pub fn transport_divergence(&self, u: &[f64], q: &[f64]) -> Result<Vec<f64>> {
        match self.scheme {
            Scheme::Cd => cd::cd_transport_divergence(u, q, self.grid.dx, self.grid.boundary),
            _ => weno::weno_flux_divergence(
                u,
                q,
                self.grid.dx,
                &self.weno_config(),
                self.grid.boundary,
            ),
        }
    }

    /// Thickness seen by the momentum equation on the velocity slots.
    pub fn thickness_at_velocity(&self, h: &[f64]) -> Result<Vec<f64>> {
        match self.grid.layout {
            Layout::StaggeredCGrid => cd::center_from_vertex(h, self.grid.boundary),
            Layout::Collocated => Ok(h.to_vec()),
        }
    }

    /// `rho max(h, H_FLOOR)` on the velocity slots.
    pub fn velocity_mass(&self, h: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .thickness_at_velocity(h)?
            .into_iter()
            .map(|hv| self.params.rho_ice * hv.max(H_FLOOR))
            .collect())
    }

    /// True for velocity slots that are prescribed rather than evolved.
    pub fn is_pinned(&self, i: usize) -> bool {
        self.grid.boundary == Boundary::DirichletZeroVelocity
            && (i == 0 || (self.grid.layout == Layout::StaggeredCGrid && i == self.grid.n_cells))
    }
}
