use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use conetrap_ffi::*;

const BENCH: &str = "[geometry]\nalpha_degrees = 120\n[material]\neps_plus = 1\neps_minus = -1.9\n[numerics]\nn_elements = 48\nm_max = 0\n";

fn last_error() -> String {
    let p = ct_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn run_round_trip() {
    let text = CString::new(BENCH).unwrap();
    let command = CString::new("exponents").unwrap();
    let mut config = ptr::null_mut();
    unsafe {
        assert_eq!(ct_config_parse(text.as_ptr(), command.as_ptr(), &mut config), CtStatus::Ok);
        let mut run = ptr::null_mut();
        assert_eq!(ct_run(config, &mut run), CtStatus::Ok);
        assert_eq!(ct_run_exit_code(run), 0);
        assert_eq!(ct_run_row_count(run), 1);
        assert_eq!(ct_run_column_count(run), 6);
        let mut eta = 0.0;
        assert_eq!(ct_run_value(run, 0, 1, &mut eta), CtStatus::Ok);
        assert!((eta.abs() - 0.965).abs() < 5e-3);
        let mut x = 0.0;
        assert_eq!(ct_run_value(run, 3, 0, &mut x), CtStatus::OutOfRange);
        let csv = ct_run_render(run, false);
        let s = CStr::from_ptr(csv).to_str().unwrap().to_owned();
        ct_string_free(csv);
        assert!(s.contains("mode_m,eta,D,beta0,beta_max,lambda_prime"));
        let json = ct_run_render(run, true);
        assert!(CStr::from_ptr(json).to_str().unwrap().contains("\"columns\""));
        ct_string_free(json);
        ct_run_free(run);
        ct_config_free(config);
    }
}

#[test]
fn errors_have_codes_and_messages() {
    let text = CString::new("[geometry]\nalpha_degrees = 120\n").unwrap();
    let mut config = ptr::null_mut();
    unsafe {
        let status = ct_config_parse(text.as_ptr(), ptr::null(), &mut config);
        assert_eq!(status, CtStatus::ConfigValidation);
        assert!(config.is_null());
        assert!(last_error().contains("CONFIG_VALIDATION_ERROR"));

        let bad = CString::new("[geometry\n").unwrap();
        assert_eq!(ct_config_parse(bad.as_ptr(), ptr::null(), &mut config), CtStatus::ConfigParse);
        let unknown = CString::new("frobnicate").unwrap();
        let ok = CString::new(BENCH).unwrap();
        assert_eq!(
            ct_config_parse(ok.as_ptr(), unknown.as_ptr(), &mut config),
            CtStatus::ConfigValidation
        );
        assert_eq!(ct_config_parse(ptr::null(), ptr::null(), &mut config), CtStatus::NullPointer);
        assert_eq!(ct_run(ptr::null(), ptr::null_mut()), CtStatus::NullPointer);
    }
}

#[test]
fn failed_runs_still_yield_a_table() {
    let text = CString::new(
        "[geometry]\nalpha_degrees = 90\n[material]\neps_plus = 1\neps_minus = -2\n[numerics]\nn_elements = 32\n",
    )
    .unwrap();
    let command = CString::new("flux-check").unwrap();
    let mut config = ptr::null_mut();
    unsafe {
        assert_eq!(ct_config_parse(text.as_ptr(), command.as_ptr(), &mut config), CtStatus::Ok);
        let mut run = ptr::null_mut();
        assert_eq!(ct_run(config, &mut run), CtStatus::NoBlackHolePair);
        assert!(!run.is_null());
        assert_eq!(ct_run_exit_code(run), 1);
        assert_eq!(ct_run_row_count(run), 0);
        ct_run_free(run);
        ct_config_free(config);
    }
}

#[test]
fn cap_exponent_handle() {
    let mut e = ptr::null_mut();
    unsafe {
        let status = ct_cap_exponent(2.0 * std::f64::consts::PI / 3.0, 1.0, -1.9, 0, 64, &mut e);
        assert_eq!(status, CtStatus::Ok);
        assert!(ct_exponent_eta(e) * ct_exponent_d(e) > 0.0);
        assert!((ct_exponent_eta(e).abs() - 0.965).abs() < 5e-3);
        assert!(ct_exponent_lambda_prime(e) > 0.0);
        assert!(ct_exponent_beta0(e) > 0.0);
        ct_exponent_free(e);

        assert_eq!(ct_cap_exponent(4.0, 1.0, -1.9, 0, 64, &mut e), CtStatus::AlphaOutOfRange);
        assert!(e.is_null());
        assert_eq!(ct_cap_exponent(1.0, 1.0, 2.0, 0, 64, &mut e), CtStatus::SignViolation);
        assert!(ct_exponent_eta(ptr::null()).is_nan());
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(ct_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/conetrap.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for symbol in ["ct_config_parse", "ct_run_value", "ct_cap_exponent", "CT_STATUS_NO_BLACK_HOLE_PAIR", "typedef struct CtRun CtRun"] {
        assert!(text.contains(symbol), "{symbol} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{}\"\nint main(void) {{ CtConfig *c = NULL; CtStatus s = ct_config_parse(\"\", NULL, &c); return s == CT_STATUS_OK; }}\n",
            header.display()
        ),
    )
    .unwrap();
    match Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).output() {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(e) => eprintln!("no C compiler available, syntax check skipped: {e}"),
    }
}
