//! Run directories: CSV snapshots, the run log and the JSON summary.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::driver::{simulate, Extrema, RunOutcome, RunStatus};
use crate::error::{Error, Result};
use crate::mms::{convergence_study, write_convergence_csv, ConvergenceRow, StudyPlan};
use crate::model::{Grid, Layout, State};
use crate::potential::ActivationEvent;
use crate::scenario::{RunSpec, Scenario};

pub const SNAPSHOT_HEADER: &str = "x_m,u_mps,h_m,A";

pub const EXIT_COMPLETED: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_BLOW_UP: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;

/// One snapshot row per cell center: `(x, u, h, A)`. Staggered velocities
/// are averaged onto centers.
pub fn snapshot_rows(state: &State, grid: &Grid) -> Vec<[f64; 4]> {
    (0..grid.n_cells)
        .map(|j| {
            let u = match grid.layout {
                Layout::StaggeredCGrid => 0.5 * (state.u[j] + state.u[j + 1]),
                Layout::Collocated => state.u[j],
            };
            [grid.center_x(j), u, state.h[j], state.a[j]]
        })
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn write_snapshot(state: &State, grid: &Grid, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let mut body = String::with_capacity(80 * grid.n_cells + 20);
    body.push_str(SNAPSHOT_HEADER);
    body.push('\n');
    for [x, u, h, a] in snapshot_rows(state, grid) {
        let _ = writeln!(body, "{x:.16e},{u:.16e},{h:.16e},{a:.16e}");
    }
    w.write_all(body.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Reads back the rows written by [`write_snapshot`].
pub fn read_snapshot(path: &Path) -> Result<Vec<[f64; 4]>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if i == 0 {
            if line.trim() != SNAPSHOT_HEADER {
                return Err(Error::Config {
                    line: 1,
                    message: format!("unexpected snapshot header '{line}'"),
                });
            }
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config {
                line: i + 1,
                message: e.to_string(),
            })?;
        let row: [f64; 4] = vals.try_into().map_err(|_| Error::Config {
            line: i + 1,
            message: "expected 4 columns".into(),
        })?;
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub scheme: String,
    pub integrator: String,
    /// `completed`, `blow_up`, `non_convergence` or `error`.
    pub status: String,
    pub exit_code: i32,
    pub steps: usize,
    pub completion_time: Option<f64>,
    pub blow_up_time: Option<f64>,
    pub last_finite_time: Option<f64>,
    pub extrema: Option<Extrema>,
    /// Whether potential forcing was applied. Without it the activations are
    /// first-violation diagnostics only.
    pub potential_applied: bool,
    pub activations: Vec<ActivationEvent>,
    pub warnings: Vec<String>,
    pub message: Option<String>,
    pub convergence: Option<Vec<ConvergenceRow>>,
}

impl Summary {
    fn blank(spec: &RunSpec) -> Self {
        Self {
            scenario: spec.scenario.name().into(),
            scheme: spec.scheme.name().into(),
            integrator: spec.integrator.name().into(),
            status: "error".into(),
            exit_code: EXIT_NON_CONVERGENCE,
            steps: 0,
            completion_time: None,
            blow_up_time: None,
            last_finite_time: None,
            extrema: None,
            potential_applied: spec.potential.is_some(),
            activations: Vec::new(),
            warnings: Vec::new(),
            message: None,
            convergence: None,
        }
    }

    pub fn from_outcome(spec: &RunSpec, out: &RunOutcome) -> Self {
        let mut s = Self::blank(spec);
        s.steps = out.steps;
        s.extrema = Some(out.extrema);
        s.activations = out.events.clone();
        s.warnings = out.warnings.clone();
        match &out.status {
            RunStatus::Completed { time } => {
                s.status = "completed".into();
                s.exit_code = EXIT_COMPLETED;
                s.completion_time = Some(*time);
            }
            RunStatus::BlowUp {
                detected_at,
                last_finite,
                message,
            } => {
                s.status = "blow_up".into();
                s.exit_code = EXIT_BLOW_UP;
                s.blow_up_time = Some(*detected_at);
                s.last_finite_time = Some(*last_finite);
                s.message = Some(message.clone());
            }
            RunStatus::NonConvergence { time, message } => {
                s.status = "non_convergence".into();
                s.exit_code = EXIT_NON_CONVERGENCE;
                s.last_finite_time = Some(*time);
                s.message = Some(message.clone());
            }
        }
        s
    }
}

/// What `run` did, for the caller's exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitReport {
    pub code: i32,
    pub summary: Summary,
    pub out_dir: PathBuf,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_summary(dir: &Path, summary: &Summary) -> Result<()> {
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(summary).map_err(|e| Error::io(&path, e))?;
    write_text(&path, &(text + "\n"))
}

fn spec_lines(spec: &RunSpec, log: &mut String) {
    let _ = writeln!(
        log,
        "spec scenario={} scheme={} integrator={} cells={} dx={} boundary={:?} dt={} horizon={} wind={}",
        spec.scenario.name(),
        spec.scheme.name(),
        spec.integrator.name(),
        spec.n_cells,
        spec.dx,
        spec.boundary,
        spec.dt,
        spec.horizon,
        spec.wind
    );
    if let Some(p) = &spec.potential {
        let _ = writeln!(
            log,
            "potential form={:?} gamma1={:e} gamma2={:e} gamma_h={:e}",
            p.form, p.gamma1, p.gamma2, p.gamma_h
        );
    }
}

fn outcome_log(spec: &RunSpec, out: &RunOutcome, log: &mut String) {
    let label = if spec.potential.is_some() { "activation" } else { "first_violation" };
    for w in &out.warnings {
        let _ = writeln!(log, "warning {w}");
    }
    for ev in &out.events {
        let _ = writeln!(
            log,
            "{label} t={} branch={} interval=({:e}, {:e}] gamma={:e}",
            ev.time,
            ev.branch.name(),
            ev.interval.lower,
            ev.interval.upper,
            ev.gamma
        );
    }
    for rec in &out.newton {
        let r = &rec.report;
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(
            log,
            "newton step={} t={} k={} residuals=[{}] lambdas=[{}]{}",
            rec.step,
            rec.time,
            r.iterations,
            fmt(&r.residuals),
            fmt(&r.lambdas),
            if r.forced.is_empty() {
                String::new()
            } else {
                format!(" forced={:?}", r.forced)
            }
        );
    }
    match &out.status {
        RunStatus::Completed { time } => {
            let _ = writeln!(log, "completed t={time}");
        }
        RunStatus::BlowUp {
            detected_at,
            last_finite,
            message,
        } => {
            let _ = writeln!(log, "blow_up detected_at={detected_at} last_finite={last_finite} cause={message}");
        }
        RunStatus::NonConvergence { time, message } => {
            let _ = writeln!(log, "non_convergence t={time} cause={message}");
        }
    }
}

fn write_outcome_files(spec: &RunSpec, out: &RunOutcome, dir: &Path) -> Result<()> {
    let grid = spec.grid()?;
    let snap_dir = dir.join("snapshots");
    fs::create_dir_all(&snap_dir).map_err(|e| Error::io(&snap_dir, e))?;
    let mut index = String::from("file,time_s\n");
    for (i, s) in out.snapshots.iter().enumerate() {
        let name = format!("snapshot_{i:05}.csv");
        write_snapshot(s, &grid, &snap_dir.join(&name))?;
        let _ = writeln!(index, "{name},{:.16e}", s.time);
    }
    write_text(&snap_dir.join("index.csv"), &index)?;

    if !out.subcycles.is_empty() {
        let mut text = String::from("time_s,min_u_mps,max_u_mps\n");
        for s in &out.subcycles {
            let _ = writeln!(text, "{:.16e},{:.16e},{:.16e}", s.time, s.min_u, s.max_u);
        }
        write_text(&dir.join("subcycles.csv"), &text)?;
    }
    if !out.trace.is_empty() {
        let mut text = String::from("time_s,subcycle,min_u_mps,max_u_mps\n");
        for r in &out.trace {
            let _ = writeln!(text, "{:.16e},{},{:.16e},{:.16e}", r.time, r.subcycle, r.min_u, r.max_u);
        }
        write_text(&dir.join("subcycle_trace.csv"), &text)?;
    }
    Ok(())
}

fn run_study(spec: &RunSpec, dir: &Path, summary: &mut Summary, log: &mut String) -> Result<()> {
    let plan = StudyPlan {
        resolutions: spec.resolutions.clone(),
        dt: spec.dt,
        horizon: spec.horizon,
        wind: spec.wind,
        params: spec.params,
    };
    let rows = convergence_study(spec.scheme, &plan)?;
    let path = dir.join("convergence.csv");
    let mut w = create(&path)?;
    write_convergence_csv(&rows, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&path, e))?;
    for r in &rows {
        let _ = writeln!(
            log,
            "mms dx={} err_u={:e} err_h={:e} err_a={:e}",
            r.dx, r.err_u, r.err_h, r.err_a
        );
    }
    summary.status = "completed".into();
    summary.exit_code = EXIT_COMPLETED;
    summary.completion_time = Some(spec.horizon);
    summary.steps = spec.n_steps();
    summary.convergence = Some(rows);
    Ok(())
}

/// Records a run that never started because its configuration was
/// rejected. Writes `summary.json` and `run.log` under `out_dir`.
pub fn write_config_error(out_dir: &Path, message: &str) -> Result<ExitReport> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let summary = Summary {
        scenario: String::new(),
        scheme: String::new(),
        integrator: String::new(),
        status: "error".into(),
        exit_code: EXIT_USAGE,
        steps: 0,
        completion_time: None,
        blow_up_time: None,
        last_finite_time: None,
        extrema: None,
        potential_applied: false,
        activations: Vec::new(),
        warnings: Vec::new(),
        message: Some(message.to_string()),
        convergence: None,
    };
    write_text(&out_dir.join("run.log"), &format!("error {message}\n"))?;
    write_summary(out_dir, &summary)?;
    Ok(ExitReport {
        code: EXIT_USAGE,
        summary,
        out_dir: out_dir.to_path_buf(),
    })
}

/// Runs `spec` and fills `out_dir`. Solver failures end up in the summary
/// and the exit code; only file-system failures are returned as errors.
pub fn run(spec: &RunSpec, out_dir: &Path) -> Result<ExitReport> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut log = String::new();
    spec_lines(spec, &mut log);
    let mut summary = Summary::blank(spec);

    let result = if spec.scenario == Scenario::Mms {
        run_study(spec, out_dir, &mut summary, &mut log)
    } else {
        simulate(spec).and_then(|out| {
            outcome_log(spec, &out, &mut log);
            summary = Summary::from_outcome(spec, &out);
            write_outcome_files(spec, &out, out_dir)
        })
    };
    if let Err(e) = result {
        if matches!(e, Error::Io { .. }) {
            write_text(&out_dir.join("run.log"), &log).ok();
            return Err(e);
        }
        let _ = writeln!(log, "error {e}");
        summary.status = "error".into();
        summary.exit_code = match e {
            Error::InvalidSpec(_) | Error::Config { .. } => EXIT_USAGE,
            _ => EXIT_NON_CONVERGENCE,
        };
        summary.message = Some(e.to_string());
    }
    write_text(&out_dir.join("run.log"), &log)?;
    write_summary(out_dir, &summary)?;
    Ok(ExitReport {
        code: summary.exit_code,
        summary,
        out_dir: out_dir.to_path_buf(),
    })
}
