//! Fifth-order finite-difference WENO on the collocated periodic grid.
//!
//! Reconstructions follow the classical Jiang-Shu construction: three cubic
//! candidates on 3-point sub-stencils, optimal weights (1/10, 6/10, 3/10)
//! and smoothness indicators built from scaled first and second
//! differences. Applied to point values `v_j`, the reconstructed interface
//! values `v_{j+1/2}` give `(v_{j+1/2} - v_{j-1/2}) / dx = v'(x_j) + O(dx^5)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Boundary;

const OPTIMAL: [f64; 3] = [0.1, 0.6, 0.3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WenoMode {
    Nonlinear,
    /// Weights frozen at their optimal values.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WenoConfig {
    pub mode: WenoMode,
    /// Regularizer in the weight denominators.
    pub smoothness_eps: f64,
}

impl Default for WenoConfig {
    fn default() -> Self {
        Self {
            mode: WenoMode::Nonlinear,
            smoothness_eps: 1e-6,
        }
    }
}

impl WenoConfig {
    pub fn linear() -> Self {
        Self {
            mode: WenoMode::Linear,
            ..Self::default()
        }
    }
}

/// Which side of the interface the five-point stencil leans to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bias {
    /// `v_{i-2..=i+2}` for the interface `i + 1/2`.
    Left,
    /// `v_{i-1..=i+3}` for the interface `i + 1/2`; the mirror of `Left`.
    Right,
}

fn candidates(v: &[f64; 5]) -> [f64; 3] {
    [
        (2.0 * v[0] - 7.0 * v[1] + 11.0 * v[2]) / 6.0,
        (-v[1] + 5.0 * v[2] + 2.0 * v[3]) / 6.0,
        (2.0 * v[2] + 5.0 * v[3] - v[4]) / 6.0,
    ]
}

fn smoothness(v: &[f64; 5]) -> [f64; 3] {
    let sq = |x: f64| x * x;
    [
        13.0 / 12.0 * sq(v[0] - 2.0 * v[1] + v[2]) + 0.25 * sq(v[0] - 4.0 * v[1] + 3.0 * v[2]),
        13.0 / 12.0 * sq(v[1] - 2.0 * v[2] + v[3]) + 0.25 * sq(v[1] - v[3]),
        13.0 / 12.0 * sq(v[2] - 2.0 * v[3] + v[4]) + 0.25 * sq(3.0 * v[2] - 4.0 * v[3] + v[4]),
    ]
}

/// Normalized nonlinear weights of a left-biased stencil.
pub fn nonlinear_weights(v: &[f64; 5], smoothness_eps: f64) -> [f64; 3] {
    let beta = smoothness(v);
    let mut alpha = [0.0; 3];
    for k in 0..3 {
        let d = smoothness_eps + beta[k];
        alpha[k] = OPTIMAL[k] / (d * d);
    }
    let sum = alpha[0] + alpha[1] + alpha[2];
    [alpha[0] / sum, alpha[1] / sum, alpha[2] / sum]
}

#[inline]
fn reconstruct_left(v: &[f64; 5], cfg: &WenoConfig) -> f64 {
    let q = candidates(v);
    let w = match cfg.mode {
        WenoMode::Linear => OPTIMAL,
        WenoMode::Nonlinear => nonlinear_weights(v, cfg.smoothness_eps),
    };
    w[0] * q[0] + w[1] * q[1] + w[2] * q[2]
}

#[inline]
fn reconstruct(v: &[f64; 5], bias: Bias, cfg: &WenoConfig) -> f64 {
    match bias {
        Bias::Left => reconstruct_left(v, cfg),
        Bias::Right => reconstruct_left(&[v[4], v[3], v[2], v[1], v[0]], cfg),
    }
}

/// Interface value reconstructed from a five-point stencil.
pub fn weno5_interface(values: &[f64; 5], bias: Bias, cfg: &WenoConfig) -> Result<f64> {
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            field: "stencil",
            index,
        });
    }
    Ok(reconstruct(values, bias, cfg))
}

#[inline]
fn stencil(field: &[f64], i: usize, bias: Bias) -> [f64; 5] {
    let n = field.len();
    // Offsets relative to i, shifted by n to stay non-negative.
    let start = match bias {
        Bias::Left => i + n - 2,
        Bias::Right => i + n - 1,
    };
    std::array::from_fn(|k| field[(start + k) % n])
}

/// Reconstructed values at every interface `i + 1/2`, `i = 0..n`.
fn interface_values(field: &[f64], bias: Bias, cfg: &WenoConfig) -> Vec<f64> {
    (0..field.len())
        .map(|i| reconstruct(&stencil(field, i, bias), bias, cfg))
        .collect()
}

fn flux_difference(interfaces: &[f64], dx: f64) -> Vec<f64> {
    let n = interfaces.len();
    (0..n)
        .map(|i| (interfaces[i] - interfaces[(i + n - 1) % n]) / dx)
        .collect()
}

fn require_periodic(boundary: Boundary, what: &'static str, len: usize) -> Result<()> {
    if boundary != Boundary::Periodic {
        return Err(Error::UnsupportedBoundary(what));
    }
    if len < crate::model::MIN_CELLS {
        return Err(Error::TooFewCells {
            got: len,
            min: crate::model::MIN_CELLS,
        });
    }
    Ok(())
}

/// Biased WENO derivative of a periodic field.
pub fn weno_derivative(
    field: &[f64],
    bias: Bias,
    dx: f64,
    cfg: &WenoConfig,
    boundary: Boundary,
) -> Result<Vec<f64>> {
    require_periodic(boundary, "WENO derivative", field.len())?;
    Ok(flux_difference(&interface_values(field, bias, cfg), dx))
}

/// Conservative divergence of `f = u q` with global Lax-Friedrichs splitting
/// `f± = (f ± alpha q) / 2`, `alpha = max |u|`.
pub fn weno_flux_divergence(
    u: &[f64],
    q: &[f64],
    dx: f64,
    cfg: &WenoConfig,
    boundary: Boundary,
) -> Result<Vec<f64>> {
    require_periodic(boundary, "WENO transport", q.len())?;
    if u.len() != q.len() {
        return Err(Error::LengthMismatch {
            field: "u",
            got: u.len(),
            expected: q.len(),
        });
    }
    let alpha = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let plus: Vec<f64> = u.iter().zip(q).map(|(u, q)| 0.5 * (u * q + alpha * q)).collect();
    let minus: Vec<f64> = u.iter().zip(q).map(|(u, q)| 0.5 * (u * q - alpha * q)).collect();
    let n = q.len();
    let interfaces: Vec<f64> = (0..n)
        .map(|i| {
            reconstruct(&stencil(&plus, i, Bias::Left), Bias::Left, cfg)
                + reconstruct(&stencil(&minus, i, Bias::Right), Bias::Right, cfg)
        })
        .collect();
    Ok(flux_difference(&interfaces, dx))
}
