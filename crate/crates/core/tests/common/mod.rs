//! Numerical oracles shared by the integration suites.

#![allow(dead_code)]

use icefloe::mms::ManufacturedSolution;
use icefloe::rheology::{stress_from_state, water_stress, wind_stress};

/// Fourth-order derivative: Richardson extrapolation of two central
/// differences with steps `step` and `step / 2`.
pub fn richardson<F: Fn(f64) -> f64>(f: F, x: f64, step: f64) -> f64 {
    let d = |s: f64| (f(x + s) - f(x - s)) / (2.0 * s);
    (4.0 * d(0.5 * step) - d(step)) / 3.0
}

/// Sixth-order derivative from three central differences at `step`,
/// `step / 2` and `step / 4`.
pub fn richardson6<F: Fn(f64) -> f64>(f: F, x: f64, step: f64) -> f64 {
    let d = |s: f64| (f(x + s) - f(x - s)) / (2.0 * s);
    let (d1, d2, d4) = (d(step), d(0.5 * step), d(0.25 * step));
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d4 - d2) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

/// Inner step for the strain rate inside the stress. Wide enough that
/// rounding in `h` stays far below the stress amplification.
pub const ORACLE_STRAIN_DX: f64 = 2e4;

/// Outer step for the stress divergence. The stress varies faster than the
/// profiles themselves, so this one is sixth order as well.
pub const ORACLE_STRESS_DX: f64 = 2e3;

pub const ORACLE_DX: f64 = 1e3;
pub const ORACLE_DT: f64 = 100.0;

/// `(F_u, F_h, F_A)` obtained by differentiating the closed-form truth
/// numerically, with the stress built from the pointwise rheology.
pub fn forcing_oracle(m: &ManufacturedSolution, x: f64, t: f64) -> [f64; 3] {
    let p = &m.params;
    let f = |i: usize| move |xx: f64| m.truth(xx, t)[i];
    let [u, h, _] = m.truth(x, t);
    let u_t = richardson(|tt| m.truth(x, tt)[0], t, ORACLE_DT);
    let h_t = richardson(|tt| m.truth(x, tt)[1], t, ORACLE_DT);
    let a_t = richardson(|tt| m.truth(x, tt)[2], t, ORACLE_DT);
    let uh_x = richardson(|xx| f(0)(xx) * f(1)(xx), x, ORACLE_DX);
    let ua_x = richardson(|xx| f(0)(xx) * f(2)(xx), x, ORACLE_DX);
    // The stress amplifies errors in u_x by ~1e13. Differencing u directly
    // loses too many digits to the 0.2 offset, so u_x is taken from h, which
    // has the same profile at O(1) scale (u = 0.001 (h - 0.1) + 0.2).
    let sigma = |xx: f64| {
        let ux = 0.001 * richardson6(f(1), xx, ORACLE_STRAIN_DX);
        let [_, hh, aa] = m.truth(xx, t);
        stress_from_state(ux, hh, aa, p)
    };
    let sigma_x = richardson6(sigma, x, ORACLE_STRESS_DX);
    let f_u = p.rho_ice * h * u_t - wind_stress(m.wind, p) + water_stress(u, p) - sigma_x;
    [f_u, h_t + uh_x, a_t + ua_x]
}

/// Observed order between two runs a factor of two apart in `dx`.
pub fn rate(err_coarse: f64, err_fine: f64) -> f64 {
    (err_coarse / err_fine).log2()
}
