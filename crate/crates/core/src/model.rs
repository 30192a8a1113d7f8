//! Shared domain types: physical constants, grids, prognostic state and the
//! derived rheology fields.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest grid accepted: the five-point WENO stencil plus a halo on each
/// side of the interface.
pub const MIN_CELLS: usize = 8;

/// Physical and regularization constants of the 1D viscous-plastic model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    /// Sea ice density, kg/m^3.
    pub rho_ice: f64,
    /// Air density, kg/m^3.
    pub rho_air: f64,
    /// Water density, kg/m^3.
    pub rho_water: f64,
    /// Air drag coefficient.
    pub c_da: f64,
    /// Water drag coefficient.
    pub c_dw: f64,
    /// Ice strength parameter P*, N/m^2.
    pub p_star: f64,
    /// Ice concentration parameter C.
    pub conc_c: f64,
    /// Ellipse ratio e of the yield curve.
    pub ellipse_e: f64,
    /// Water drag regularizer, m^2/s^2.
    pub eps1: f64,
    /// Strain-rate regularizer, s^-2.
    pub eps2: f64,
    /// Viscosity cap scale, s^-1.
    pub delta_min: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        Self {
            rho_ice: 900.0,
            rho_air: 1.3,
            rho_water: 1026.0,
            c_da: 1.2e-3,
            c_dw: 5.5e-3,
            p_star: 27.5e3,
            conc_c: 20.0,
            ellipse_e: 2.0,
            eps1: 1e-10,
            eps2: 1e-22,
            delta_min: 2e-9,
        }
    }
}

impl PhysParams {
    /// `e^-2`, the shear-to-bulk viscosity ratio.
    pub fn inv_e2(&self) -> f64 {
        1.0 / (self.ellipse_e * self.ellipse_e)
    }

    /// `1 + e^-2`.
    pub fn one_plus_inv_e2(&self) -> f64 {
        1.0 + self.inv_e2()
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rho_ice", self.rho_ice),
            ("rho_air", self.rho_air),
            ("rho_water", self.rho_water),
            ("c_da", self.c_da),
            ("c_dw", self.c_dw),
            ("p_star", self.p_star),
            ("conc_c", self.conc_c),
            ("ellipse_e", self.ellipse_e),
            ("eps1", self.eps1),
            ("eps2", self.eps2),
            ("delta_min", self.delta_min),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "physical parameter {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Layout {
    /// Every field at the cell midpoints.
    Collocated,
    /// Arakawa C-grid: velocity on the `n + 1` vertices, scalars at centers.
    StaggeredCGrid,
}

impl Layout {
    pub fn name(self) -> &'static str {
        match self {
            Layout::Collocated => "collocated",
            Layout::StaggeredCGrid => "staggered",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Boundary {
    Periodic,
    /// `u = 0` held fixed on both end vertices.
    DirichletZeroVelocity,
}

/// Spatial discretization of the momentum and transport operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    Cd,
    Weno,
    WenoLinear,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Cd => "cd",
            Scheme::Weno => "weno",
            Scheme::WenoLinear => "weno_linear",
        }
    }

    /// The grid layout the scheme is defined on.
    pub fn layout(self) -> Layout {
        match self {
            Scheme::Cd => Layout::StaggeredCGrid,
            Scheme::Weno | Scheme::WenoLinear => Layout::Collocated,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_cells: usize,
    /// Cell width, m.
    pub dx: f64,
    /// Domain length, m. Always `n_cells * dx`.
    pub length: f64,
    pub layout: Layout,
    pub boundary: Boundary,
}

/// Builds a uniform grid on `[0, n_cells * dx]`.
pub fn make_grid(n_cells: usize, dx: f64, layout: Layout, boundary: Boundary) -> Result<Grid> {
    if n_cells < MIN_CELLS {
        return Err(Error::TooFewCells {
            got: n_cells,
            min: MIN_CELLS,
        });
    }
    if !(dx.is_finite() && dx > 0.0) {
        return Err(Error::BadSpacing(dx));
    }
    Ok(Grid {
        n_cells,
        dx,
        length: n_cells as f64 * dx,
        layout,
        boundary,
    })
}

impl Grid {
    /// Number of velocity slots for this layout.
    pub fn velocity_slots(&self) -> usize {
        match self.layout {
            Layout::Collocated => self.n_cells,
            Layout::StaggeredCGrid => self.n_cells + 1,
        }
    }

    /// Number of scalar (h, A, sigma, ...) slots.
    pub fn center_slots(&self) -> usize {
        self.n_cells
    }

    /// Midpoint of cell `j`.
    pub fn center_x(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx
    }

    /// Left edge of cell `i`; `i == n_cells` is the right domain edge.
    pub fn vertex_x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    /// Coordinate of velocity slot `i`.
    pub fn velocity_x(&self, i: usize) -> f64 {
        match self.layout {
            Layout::Collocated => self.center_x(i),
            Layout::StaggeredCGrid => self.vertex_x(i),
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.center_slots()).map(|j| self.center_x(j)).collect()
    }

    pub fn velocity_points(&self) -> Vec<f64> {
        (0..self.velocity_slots()).map(|i| self.velocity_x(i)).collect()
    }

    pub(crate) fn require_layout(&self, layout: Layout) -> Result<()> {
        if self.layout == layout {
            Ok(())
        } else {
            Err(Error::LayoutMismatch {
                expected: layout.name(),
            })
        }
    }

    pub(crate) fn require_scheme(&self, scheme: Scheme) -> Result<()> {
        if scheme.layout() == self.layout {
            Ok(())
        } else {
            Err(Error::SchemeLayout {
                scheme: scheme.name(),
                layout: self.layout.name(),
            })
        }
    }
}

/// Prognostic fields at one time level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    /// Model time, s.
    pub time: f64,
    /// Velocity, m/s, on the velocity slots of the grid.
    pub u: Vec<f64>,
    /// Mean ice thickness, m, at cell centers.
    pub h: Vec<f64>,
    /// Ice concentration at cell centers.
    pub a: Vec<f64>,
}

impl State {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            time: 0.0,
            u: vec![0.0; grid.velocity_slots()],
            h: vec![0.0; grid.center_slots()],
            a: vec![0.0; grid.center_slots()],
        }
    }

    /// Uniform fields; on Dirichlet grids the end velocities are pinned to 0.
    pub fn uniform(grid: &Grid, u: f64, h: f64, a: f64) -> Self {
        let mut s = Self {
            time: 0.0,
            u: vec![u; grid.velocity_slots()],
            h: vec![h; grid.center_slots()],
            a: vec![a; grid.center_slots()],
        };
        if grid.boundary == Boundary::DirichletZeroVelocity {
            pin_boundary_velocity(grid, &mut s.u);
        }
        s
    }

    pub fn is_finite(&self) -> bool {
        self.u
            .iter()
            .chain(&self.h)
            .chain(&self.a)
            .all(|v| v.is_finite())
    }
}

pub(crate) fn pin_boundary_velocity(grid: &Grid, u: &mut [f64]) {
    if grid.boundary == Boundary::DirichletZeroVelocity {
        if let Some(first) = u.first_mut() {
            *first = 0.0;
        }
        if grid.layout == Layout::StaggeredCGrid {
            if let Some(last) = u.last_mut() {
                *last = 0.0;
            }
        }
    }
}

/// Derived per-cell rheology quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct RheologyFields {
    pub delta: Vec<f64>,
    pub zeta: Vec<f64>,
    pub eta: Vec<f64>,
    pub pressure: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// Why a state failed validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    NonFinite { field: &'static str, index: usize },
    SizeMismatch {
        field: &'static str,
        got: usize,
        expected: usize,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::NonFinite { field, index } => {
                write!(f, "{field}[{index}] is not finite")
            }
            Diagnostic::SizeMismatch {
                field,
                got,
                expected,
            } => write!(f, "{field} has {got} entries, expected {expected}"),
        }
    }
}

impl From<Diagnostic> for Error {
    fn from(d: Diagnostic) -> Self {
        match d {
            Diagnostic::NonFinite { field, index } => Error::NonFinite { field, index },
            Diagnostic::SizeMismatch {
                field,
                got,
                expected,
            } => Error::LengthMismatch {
                field,
                got,
                expected,
            },
        }
    }
}

/// Checks field sizes against the grid layout, then finiteness, in the order
/// u, h, A. Reports the first problem found.
pub fn validate_state(state: &State, grid: &Grid) -> std::result::Result<(), Diagnostic> {
    let fields: [(&'static str, &[f64], usize); 3] = [
        ("u", &state.u, grid.velocity_slots()),
        ("h", &state.h, grid.center_slots()),
        ("A", &state.a, grid.center_slots()),
    ];
    for (field, values, expected) in fields {
        if values.len() != expected {
            return Err(Diagnostic::SizeMismatch {
                field,
                got: values.len(),
                expected,
            });
        }
    }
    for (field, values, _) in fields {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Diagnostic::NonFinite { field, index });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_table_values() {
        let p = PhysParams::default();
        let expected = PhysParams {
            rho_ice: 900.0,
            rho_air: 1.3,
            rho_water: 1026.0,
            c_da: 1.2e-3,
            c_dw: 5.5e-3,
            p_star: 27500.0,
            conc_c: 20.0,
            ellipse_e: 2.0,
            eps1: 1e-10,
            eps2: 1e-22,
            delta_min: 2e-9,
        };
        assert_eq!(p, expected);
        p.validate().unwrap();
    }

    #[test]
    fn negative_parameter_rejected() {
        let p = PhysParams {
            p_star: -1.0,
            ..PhysParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn grid_lengths_and_slots() {
        let g = make_grid(200, 1e4, Layout::Collocated, Boundary::Periodic).unwrap();
        assert_eq!(g.length, 2e6);
        assert_eq!(g.velocity_slots(), g.center_slots());

        let g = make_grid(
            100,
            2e4,
            Layout::StaggeredCGrid,
            Boundary::DirichletZeroVelocity,
        )
        .unwrap();
        assert_eq!(g.velocity_slots(), 101);
        assert_eq!(g.center_slots(), 100);
        assert_eq!(g.length, 2e6);
    }

    #[test]
    fn grid_too_small() {
        assert_eq!(
            make_grid(4, 1.0, Layout::Collocated, Boundary::Periodic),
            Err(Error::TooFewCells { got: 4, min: 8 })
        );
        assert!(make_grid(10, 0.0, Layout::Collocated, Boundary::Periodic).is_err());
    }

    #[test]
    fn validate_state_diagnostics() {
        let g = make_grid(10, 1.0, Layout::StaggeredCGrid, Boundary::Periodic).unwrap();
        let s = State::zeros(&g);
        assert_eq!(validate_state(&s, &g), Ok(()));

        let mut bad = s.clone();
        bad.u[3] = f64::NAN;
        assert_eq!(
            validate_state(&bad, &g),
            Err(Diagnostic::NonFinite {
                field: "u",
                index: 3
            })
        );

        let mut short = s.clone();
        short.h.pop();
        assert_eq!(
            validate_state(&short, &g),
            Err(Diagnostic::SizeMismatch {
                field: "h",
                got: 9,
                expected: 10
            })
        );
    }

    #[test]
    fn uniform_pins_dirichlet_ends() {
        let g = make_grid(
            10,
            1.0,
            Layout::StaggeredCGrid,
            Boundary::DirichletZeroVelocity,
        )
        .unwrap();
        let s = State::uniform(&g, 1.0, 1.0, 0.5);
        assert_eq!(s.u[0], 0.0);
        assert_eq!(s.u[10], 0.0);
        assert_eq!(s.u[5], 1.0);
    }
}
