//! Second-order centered differences on the staggered C-grid.
//!
//! Velocity lives on the `n + 1` vertices `x_i = i dx`, scalars on the `n`
//! centers `x_{i+1/2}`. On periodic grids vertex `n` is the image of vertex
//! 0; every operator computes the two from the same wrapped stencil so the
//! duplicates stay bitwise equal.

use crate::error::{Error, Result};
use crate::model::Boundary;

fn staggered_pair(vertex: usize, center: usize) -> Result<()> {
    if vertex == center + 1 && center >= 1 {
        Ok(())
    } else {
        Err(Error::LayoutMismatch {
            expected: "staggered",
        })
    }
}

/// Averages center values onto vertices.
///
/// End vertices wrap on periodic grids and copy the adjacent center under
/// Dirichlet conditions.
pub fn center_from_vertex(h_center: &[f64], boundary: Boundary) -> Result<Vec<f64>> {
    let n = h_center.len();
    if n == 0 {
        return Err(Error::LayoutMismatch {
            expected: "staggered",
        });
    }
    let mut out = Vec::with_capacity(n + 1);
    let (first, last) = match boundary {
        Boundary::Periodic => {
            let w = 0.5 * (h_center[n - 1] + h_center[0]);
            (w, w)
        }
        Boundary::DirichletZeroVelocity => (h_center[0], h_center[n - 1]),
    };
    out.push(first);
    out.extend(h_center.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    out.push(last);
    Ok(out)
}

/// `(u_{i+1} - u_i) / dx` at every center.
pub fn cd_center_gradient(u_vertex: &[f64], dx: f64) -> Result<Vec<f64>> {
    if u_vertex.len() < 2 {
        return Err(Error::LayoutMismatch {
            expected: "staggered",
        });
    }
    Ok(u_vertex.windows(2).map(|w| (w[1] - w[0]) / dx).collect())
}

/// `(sigma_{i+1/2} - sigma_{i-1/2}) / dx` at every vertex.
///
/// Dirichlet end vertices are left at zero: the velocity there is pinned and
/// the value is never used.
pub fn cd_vertex_divergence(sigma_center: &[f64], dx: f64, boundary: Boundary) -> Result<Vec<f64>> {
    let n = sigma_center.len();
    if n == 0 {
        return Err(Error::LayoutMismatch {
            expected: "staggered",
        });
    }
    let edge = match boundary {
        Boundary::Periodic => (sigma_center[0] - sigma_center[n - 1]) / dx,
        Boundary::DirichletZeroVelocity => 0.0,
    };
    let mut out = Vec::with_capacity(n + 1);
    out.push(edge);
    out.extend(sigma_center.windows(2).map(|w| (w[1] - w[0]) / dx));
    out.push(edge);
    Ok(out)
}

/// Flux-form divergence `d(u q)/dx` at centers, with `q` averaged to the
/// vertices. Dirichlet grids carry zero flux through both end vertices.
pub fn cd_transport_divergence(
    u_vertex: &[f64],
    q_center: &[f64],
    dx: f64,
    boundary: Boundary,
) -> Result<Vec<f64>> {
    staggered_pair(u_vertex.len(), q_center.len())?;
    let n = q_center.len();
    let q_vertex = center_from_vertex(q_center, boundary)?;
    let mut flux: Vec<f64> = u_vertex.iter().zip(&q_vertex).map(|(u, q)| u * q).collect();
    match boundary {
        Boundary::Periodic => flux[n] = flux[0],
        Boundary::DirichletZeroVelocity => {
            flux[0] = 0.0;
            flux[n] = 0.0;
        }
    }
    Ok(flux.windows(2).map(|w| (w[1] - w[0]) / dx).collect())
}
