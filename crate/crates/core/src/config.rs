//! Line-oriented `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. `scenario` is applied first
//! wherever it appears, then every other key in file order. Lengths accept
//! `m` and `km`, times accept `s`, `min`, `h` and `d`.

use crate::error::{Error, Result};
use crate::mms::MMS_LENGTH;
use crate::model::{Boundary, Scheme};
use crate::potential::{PotentialConfig, PotentialForm};
use crate::scenario::{InitialCondition, Integrator, RunSpec, Scenario, SharpInitialCondition};

/// Keys understood by [`load_config`] and [`apply_override`].
pub const KEYS: &[&str] = &[
    "scenario",
    "scheme",
    "integrator",
    "cells",
    "dx",
    "boundary",
    "dt",
    "horizon",
    "wind",
    "n_sub",
    "damping_factor",
    "potential",
    "potential_form",
    "gamma1",
    "gamma2",
    "gamma_h",
    "k_max",
    "gamma_nl",
    "fd_eps",
    "snapshot_every",
    "trace_start",
    "trace_end",
    "initial",
    "u0",
    "h0",
    "a0",
    "resolutions",
    "rho_ice",
    "rho_air",
    "rho_water",
    "c_da",
    "c_dw",
    "p_star",
    "conc_c",
    "ellipse_e",
    "eps1",
    "eps2",
    "delta_min",
];

fn split_unit(v: &str) -> (&str, &str) {
    let v = v.trim();
    // No unit starts with 'e', so exponents stay with the number.
    let idx = v
        .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
        .unwrap_or(v.len());
    (v[..idx].trim(), v[idx..].trim())
}

fn number(v: &str) -> std::result::Result<f64, String> {
    let x: f64 = v.trim().parse().map_err(|_| format!("'{v}' is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("'{v}' is not finite"))
    }
}

fn with_unit(v: &str, units: &[(&str, f64)], kind: &str) -> std::result::Result<f64, String> {
    let (num, unit) = split_unit(v);
    let x = number(num)?;
    if unit.is_empty() {
        return Ok(x);
    }
    units
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, f)| x * f)
        .ok_or_else(|| format!("unknown {kind} unit '{unit}'"))
}

/// Metres; bare numbers are metres.
pub fn parse_length(v: &str) -> std::result::Result<f64, String> {
    with_unit(v, &[("m", 1.0), ("km", 1e3)], "length")
}

/// Seconds; bare numbers are seconds.
pub fn parse_duration(v: &str) -> std::result::Result<f64, String> {
    with_unit(
        v,
        &[("s", 1.0), ("min", 60.0), ("h", 3600.0), ("d", 86400.0)],
        "time",
    )
}

fn parse_speed(v: &str) -> std::result::Result<f64, String> {
    with_unit(v, &[("m/s", 1.0)], "speed")
}

fn count(v: &str) -> std::result::Result<usize, String> {
    v.trim().parse().map_err(|_| format!("'{v}' is not a non-negative integer"))
}

fn potential_mut(spec: &mut RunSpec) -> &mut PotentialConfig {
    spec.potential.get_or_insert_with(PotentialConfig::default)
}

/// Tracks keys whose effect depends on others so they can be resolved after
/// all lines are read.
#[derive(Default)]
struct Pending {
    cells: bool,
    dx: bool,
    resolutions: bool,
    trace_start: Option<f64>,
    trace_end: Option<f64>,
    uniform: [Option<f64>; 3],
}

fn apply(spec: &mut RunSpec, pending: &mut Pending, key: &str, value: &str) -> std::result::Result<(), String> {
    let v = value.trim();
    match key {
        "scenario" => {
            let s = Scenario::parse(v).ok_or_else(|| format!("unknown scenario '{v}'"))?;
            *spec = RunSpec::for_scenario(s);
        }
        "scheme" => {
            spec.scheme = match v {
                "cd" => Scheme::Cd,
                "weno" => Scheme::Weno,
                "weno_linear" => Scheme::WenoLinear,
                _ => return Err(format!("unknown scheme '{v}'")),
            }
        }
        "integrator" => {
            spec.integrator = Integrator::parse(v).ok_or_else(|| format!("unknown integrator '{v}'"))?
        }
        "cells" => {
            spec.n_cells = count(v)?;
            pending.cells = true;
        }
        "dx" => {
            spec.dx = parse_length(v)?;
            pending.dx = true;
        }
        "boundary" => {
            spec.boundary = match v {
                "periodic" => Boundary::Periodic,
                "dirichlet" => Boundary::DirichletZeroVelocity,
                _ => return Err(format!("unknown boundary '{v}'")),
            }
        }
        "dt" => spec.dt = parse_duration(v)?,
        "horizon" => spec.horizon = parse_duration(v)?,
        "wind" => spec.wind = parse_speed(v)?,
        "n_sub" => spec.evp.n_sub = count(v)?,
        "damping_factor" => spec.evp.damping_factor = number(v)?,
        "potential" => match v {
            "on" | "true" => {
                potential_mut(spec);
            }
            "off" | "false" => spec.potential = None,
            _ => return Err(format!("potential must be on or off, got '{v}'")),
        },
        "potential_form" => {
            potential_mut(spec).form = match v {
                "quadratic" => PotentialForm::Quadratic,
                "linear" => PotentialForm::Linear,
                _ => return Err(format!("unknown potential form '{v}'")),
            }
        }
        "gamma1" => potential_mut(spec).gamma1 = number(v)?,
        "gamma2" => potential_mut(spec).gamma2 = number(v)?,
        "gamma_h" => potential_mut(spec).gamma_h = number(v)?,
        "k_max" => spec.newton.k_max = count(v)?,
        "gamma_nl" => spec.newton.gamma_nl = number(v)?,
        "fd_eps" => spec.newton.fd_eps = number(v)?,
        "snapshot_every" => spec.snapshot_every = parse_duration(v)?,
        "trace_start" => pending.trace_start = Some(parse_duration(v)?),
        "trace_end" => pending.trace_end = Some(parse_duration(v)?),
        "initial" => {
            spec.initial = match v {
                "sharp" => InitialCondition::Sharp(SharpInitialCondition::default()),
                "uniform" => InitialCondition::Uniform { u: 0.0, h: 1.0, a: 0.9 },
                "manufactured" => InitialCondition::Manufactured,
                _ => return Err(format!("unknown initial condition '{v}'")),
            }
        }
        "u0" => pending.uniform[0] = Some(parse_speed(v)?),
        "h0" => pending.uniform[1] = Some(parse_length(v)?),
        "a0" => pending.uniform[2] = Some(number(v)?),
        "resolutions" => {
            spec.resolutions = v.split(',').map(count).collect::<std::result::Result<_, _>>()?;
            pending.resolutions = true;
        }
        "rho_ice" => spec.params.rho_ice = number(v)?,
        "rho_air" => spec.params.rho_air = number(v)?,
        "rho_water" => spec.params.rho_water = number(v)?,
        "c_da" => spec.params.c_da = number(v)?,
        "c_dw" => spec.params.c_dw = number(v)?,
        "p_star" => spec.params.p_star = number(v)?,
        "conc_c" => spec.params.conc_c = number(v)?,
        "ellipse_e" => spec.params.ellipse_e = number(v)?,
        "eps1" => spec.params.eps1 = number(v)?,
        "eps2" => spec.params.eps2 = number(v)?,
        "delta_min" => spec.params.delta_min = number(v)?,
        _ => return Err(format!("unknown key '{key}'")),
    }
    Ok(())
}

fn finish(spec: &mut RunSpec, pending: &Pending) -> Result<()> {
    if spec.scenario == Scenario::Mms {
        if pending.cells && !pending.resolutions {
            spec.resolutions = vec![spec.n_cells];
        }
        if pending.cells && !pending.dx {
            spec.dx = MMS_LENGTH / spec.n_cells as f64;
        }
    }
    if pending.uniform.iter().any(Option::is_some) {
        let (u, h, a) = match spec.initial {
            InitialCondition::Uniform { u, h, a } => (u, h, a),
            _ => (0.0, 1.0, 0.9),
        };
        spec.initial = InitialCondition::Uniform {
            u: pending.uniform[0].unwrap_or(u),
            h: pending.uniform[1].unwrap_or(h),
            a: pending.uniform[2].unwrap_or(a),
        };
    }
    match (pending.trace_start, pending.trace_end) {
        (None, None) => {}
        (a, b) => spec.trace_window = Some((a.unwrap_or(0.0), b.unwrap_or(f64::INFINITY))),
    }
    spec.validate()
}

fn split_line(raw: &str) -> Option<std::result::Result<(&str, &str), String>> {
    let line = raw.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
        return None;
    }
    Some(match line.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim(), v.trim())),
        _ => Err(format!("expected key=value, got '{line}'")),
    })
}

/// Parses configuration text, applying `overrides` (as `key=value` pairs)
/// after the file contents.
pub fn load_config_with_overrides(text: &str, overrides: &[String]) -> Result<RunSpec> {
    let mut entries: Vec<(usize, &str, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        match split_line(raw) {
            None => {}
            Some(Ok((k, v))) => entries.push((i + 1, k, v)),
            Some(Err(message)) => return Err(Error::Config { line: i + 1, message }),
        }
    }
    for (line, key, _) in &entries {
        if !KEYS.contains(key) {
            return Err(Error::Config {
                line: *line,
                message: format!("unknown key '{key}'"),
            });
        }
    }

    let mut spec = RunSpec::for_scenario(Scenario::Custom);
    let mut pending = Pending::default();
    let scenario_lines = entries.iter().filter(|(_, k, _)| *k == "scenario");
    for (line, key, value) in scenario_lines.chain(entries.iter().filter(|(_, k, _)| *k != "scenario")) {
        apply(&mut spec, &mut pending, key, value).map_err(|message| Error::Config { line: *line, message })?;
    }
    for o in overrides {
        let (k, v) = match split_line(o) {
            Some(Ok(kv)) => kv,
            _ => return Err(Error::InvalidSpec(format!("override '{o}' is not key=value"))),
        };
        if k == "scenario" {
            return Err(Error::InvalidSpec("the scenario cannot be overridden".into()));
        }
        apply(&mut spec, &mut pending, k, v).map_err(|m| Error::InvalidSpec(format!("override '{o}': {m}")))?;
    }
    finish(&mut spec, &pending)?;
    Ok(spec)
}

pub fn load_config(text: &str) -> Result<RunSpec> {
    load_config_with_overrides(text, &[])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_parsing() {
        assert_eq!(parse_length("10km").unwrap(), 10e3);
        assert_eq!(parse_length("20 km").unwrap(), 20e3);
        assert_eq!(parse_length("1.5e4").unwrap(), 1.5e4);
        assert_eq!(parse_duration("6d").unwrap(), 518_400.0);
        assert_eq!(parse_duration("1 h").unwrap(), 3600.0);
        assert_eq!(parse_duration("2min").unwrap(), 120.0);
        assert_eq!(parse_duration("1e-4").unwrap(), 1e-4);
        assert!(parse_duration("3 weeks").is_err());
    }

    #[test]
    fn documented_examples() {
        let s = load_config("scenario=sharp_vp\nscheme=weno").unwrap();
        assert_eq!(s.scenario, Scenario::SharpVp);
        assert_eq!(s.scheme, Scheme::Weno);
        assert_eq!((s.dx, s.dt, s.horizon), (10e3, 1.0, 3600.0));

        assert!(load_config("scheme=weno\nboundary=dirichlet").is_err());

        let m = load_config("scenario=mms\nscheme=cd\ncells=100").unwrap();
        assert_eq!(m.dx, 20e3);
        assert_eq!(m.resolutions, vec![100]);
    }

    #[test]
    fn scenario_line_applies_first() {
        let s = load_config("dt = 5 # comment\nscenario = sharp_evp\n").unwrap();
        assert_eq!(s.dt, 5.0);
        assert_eq!(s.integrator, Integrator::Evp);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match load_config("scenario=sharp_vp\n\nbogus=1") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match load_config("# c\ndt=abc") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(load_config("no equals sign"), Err(Error::Config { line: 1, .. })));
    }

    #[test]
    fn overrides_and_potential() {
        let s = load_config_with_overrides(
            "scenario=potential_dirichlet",
            &["potential=on".into(), "gamma2=0.05".into(), "horizon=1d".into()],
        )
        .unwrap();
        let p = s.potential.unwrap();
        assert_eq!((p.gamma1, p.gamma2), (1e-3, 0.05));
        assert_eq!(s.horizon, 86400.0);
        assert!(load_config_with_overrides("", &["nope=1".into()]).is_err());
    }
}
