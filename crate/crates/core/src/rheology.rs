//! Pointwise closures of the viscous-plastic rheology and the quadratic
//! air/water drag laws.
//!
//! All closures are total: thickness and concentration outside their
//! physical ranges are accepted as-is.

use crate::model::{PhysParams, RheologyFields};

/// Ice strength `P = P* h exp(-C (1 - A))`.
pub fn ice_strength(h: f64, a: f64, params: &PhysParams) -> f64 {
    params.p_star * h * (-params.conc_c * (1.0 - a)).exp()
}

/// Regularized strain-rate magnitude `sqrt((1 + e^-2) (u_x^2 + eps2))`.
pub fn strain_delta(du_dx: f64, params: &PhysParams) -> f64 {
    (params.one_plus_inv_e2() * (du_dx * du_dx + params.eps2)).sqrt()
}

/// Bulk and shear viscosities `(zeta, eta)` with the smooth tanh cap.
pub fn viscosities(p: f64, delta: f64, params: &PhysParams) -> (f64, f64) {
    let zeta = p / (2.0 * params.delta_min) * (params.delta_min / delta).tanh();
    (zeta, zeta * params.inv_e2())
}

/// One-dimensional stress `(eta + zeta) u_x - P / 2`.
pub fn stress(zeta: f64, eta: f64, du_dx: f64, p: f64) -> f64 {
    (eta + zeta) * du_dx - 0.5 * p
}

/// Stress evaluated directly from strain rate and the scalar state.
pub fn stress_from_state(du_dx: f64, h: f64, a: f64, params: &PhysParams) -> f64 {
    let p = ice_strength(h, a, params);
    let (zeta, eta) = viscosities(p, strain_delta(du_dx, params), params);
    stress(zeta, eta, du_dx, p)
}

/// Air drag on the ice for surface wind `u_air`.
pub fn wind_stress(u_air: f64, params: &PhysParams) -> f64 {
    params.rho_air * params.c_da * u_air.abs() * u_air
}

/// Water drag for ice velocity `u` over an ocean at rest.
pub fn water_stress(u: f64, params: &PhysParams) -> f64 {
    params.rho_water * params.c_dw * (u * u + params.eps1).sqrt() * u
}

/// Evaluates every rheology quantity on matching slices of strain rate,
/// thickness and concentration.
pub fn rheology_fields(du_dx: &[f64], h: &[f64], a: &[f64], params: &PhysParams) -> RheologyFields {
    let n = du_dx.len();
    debug_assert!(h.len() == n && a.len() == n);
    let mut out = RheologyFields {
        delta: Vec::with_capacity(n),
        zeta: Vec::with_capacity(n),
        eta: Vec::with_capacity(n),
        pressure: Vec::with_capacity(n),
        sigma: Vec::with_capacity(n),
    };
    for ((&ux, &hj), &aj) in du_dx.iter().zip(h).zip(a) {
        let p = ice_strength(hj, aj, params);
        let delta = strain_delta(ux, params);
        let (zeta, eta) = viscosities(p, delta, params);
        out.delta.push(delta);
        out.zeta.push(zeta);
        out.eta.push(eta);
        out.pressure.push(p);
        out.sigma.push(stress(zeta, eta, ux, p));
    }
    out
}

/// Stress only; the hot path of every right-hand side.
pub fn stress_field(du_dx: &[f64], h: &[f64], a: &[f64], params: &PhysParams) -> Vec<f64> {
    du_dx
        .iter()
        .zip(h)
        .zip(a)
        .map(|((&ux, &hj), &aj)| stress_from_state(ux, hj, aj, params))
        .collect()
}
