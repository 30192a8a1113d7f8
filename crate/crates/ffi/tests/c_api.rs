use std::ffi::{CStr, CString};
use std::ptr;

use icefloe_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = icefloe_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn spec(text: &str) -> *mut IcefloeSpec {
    let mut h = ptr::null_mut();
    let st = unsafe { icefloe_spec_from_config(c(text).as_ptr(), &mut h) };
    assert_eq!(st, IcefloeStatus::Ok, "{}", last_error());
    h
}

const SMALL: &str = "scenario=custom\nscheme=cd\nintegrator=tvrk3\ncells=20\ndx=20km\ndt=1s\nhorizon=10s\n";

#[test]
fn bad_config_reports_line_and_leaves_handle_null() {
    let mut h = ptr::dangling_mut::<IcefloeSpec>();
    let st = unsafe { icefloe_spec_from_config(c("scenario=custom\nbogus=3\n").as_ptr(), &mut h) };
    assert_eq!(st, IcefloeStatus::Config);
    assert!(h.is_null());
    assert!(last_error().contains("line 2"), "{}", last_error());
}

#[test]
fn null_arguments_are_rejected() {
    let st = unsafe { icefloe_spec_from_config(ptr::null(), ptr::null_mut()) };
    assert_eq!(st, IcefloeStatus::NullPointer);
    assert_eq!(unsafe { icefloe_sim_step(ptr::null_mut()) }, IcefloeStatus::NullPointer);
    assert!(unsafe { icefloe_sim_time(ptr::null()) }.is_nan());
    unsafe {
        icefloe_spec_free(ptr::null_mut());
        icefloe_sim_free(ptr::null_mut());
    }
}

#[test]
fn invalid_override_keeps_previous_spec() {
    let h = spec(SMALL);
    unsafe {
        assert_eq!(icefloe_spec_set(h, c("cells").as_ptr(), c("40").as_ptr()), IcefloeStatus::Ok);
        assert_eq!(icefloe_spec_cells(h), 40);
        let st = icefloe_spec_set(h, c("cells").as_ptr(), c("many").as_ptr());
        assert_eq!(st, IcefloeStatus::InvalidSpec);
        assert_eq!(icefloe_spec_cells(h), 40);
        icefloe_spec_free(h);
    }
}

#[test]
fn stepping_matches_field_layout() {
    let h = spec(SMALL);
    unsafe {
        let mut sim = ptr::null_mut();
        assert_eq!(icefloe_sim_new(h, &mut sim), IcefloeStatus::Ok);
        assert_eq!(icefloe_sim_field_len(sim, IcefloeField::Velocity), 21);
        assert_eq!(icefloe_sim_field_len(sim, IcefloeField::Thickness), 20);
        for _ in 0..3 {
            assert_eq!(icefloe_sim_step(sim), IcefloeStatus::Ok);
        }
        assert_eq!(icefloe_sim_time(sim), 3.0);

        let mut small = [0.0; 5];
        let st = icefloe_sim_copy_field(sim, IcefloeField::Concentration, small.as_mut_ptr(), small.len());
        assert_eq!(st, IcefloeStatus::BufferTooSmall);

        let mut a = vec![0.0; 20];
        assert_eq!(icefloe_sim_copy_field(sim, IcefloeField::Concentration, a.as_mut_ptr(), a.len()), IcefloeStatus::Ok);
        assert!(a.iter().all(|v| v.is_finite() && *v > 0.0));
        icefloe_sim_free(sim);
        icefloe_spec_free(h);
    }
}

#[test]
fn run_writes_summary_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let h = spec(SMALL);
    let mut code = -1;
    let st = unsafe { icefloe_run(h, c(dir.path().to_str().unwrap()).as_ptr(), &mut code) };
    assert_eq!(st, IcefloeStatus::Ok);
    assert_eq!(code, 0);
    let summary = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(summary.contains("\"completed\""), "{summary}");
    unsafe { icefloe_spec_free(h) };
}

#[test]
fn pointwise_physics_is_odd_and_capped() {
    let p = icefloe_ice_strength(1.0, 1.0);
    assert_eq!(p, 27_500.0);
    let plus = icefloe_stress(1e-6, 1.0, 1.0);
    let minus = icefloe_stress(-1e-6, 1.0, 1.0);
    // sigma = (zeta + eta) u_x - P/2, so the strain part is odd.
    assert!(((plus + p / 2.0) + (minus + p / 2.0)).abs() < 1e-9 * p);
    assert!(plus.abs() <= p);
}

#[test]
fn converge_fills_rows_with_nan_coarse_rates() {
    let mut rows = vec![0.0; 3 * ICEFLOE_CONVERGENCE_COLUMNS];
    let mut n = 0;
    let st = unsafe { icefloe_converge(c("cd").as_ptr(), 0.01, rows.as_mut_ptr(), rows.len(), &mut n) };
    assert_eq!(st, IcefloeStatus::Ok, "{}", last_error());
    assert_eq!(n, 3);
    assert_eq!(rows[0], 40_000.0);
    assert!(rows[4].is_nan());
    assert!(rows[ICEFLOE_CONVERGENCE_COLUMNS + 4].is_finite());

    let st = unsafe { icefloe_converge(c("spectral").as_ptr(), 0.01, rows.as_mut_ptr(), rows.len(), &mut n) };
    assert_eq!(st, IcefloeStatus::InvalidSpec);
    let st = unsafe { icefloe_converge(c("cd").as_ptr(), 0.01, rows.as_mut_ptr(), 4, &mut n) };
    assert_eq!(st, IcefloeStatus::BufferTooSmall);
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/icefloe.h");
    for name in [
        "icefloe_last_error",
        "icefloe_spec_from_config",
        "icefloe_spec_set",
        "icefloe_spec_cells",
        "icefloe_spec_free",
        "icefloe_run",
        "icefloe_sim_new",
        "icefloe_sim_step",
        "icefloe_sim_time",
        "icefloe_sim_field_len",
        "icefloe_sim_copy_field",
        "icefloe_sim_free",
        "icefloe_ice_strength",
        "icefloe_stress",
        "icefloe_converge",
    ] {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct IcefloeSpec IcefloeSpec;"));
}
