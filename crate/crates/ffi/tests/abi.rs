use std::ffi::{CStr, CString};
use std::ptr;

use waveguard_ffi::*;

fn scenario(json: &str) -> (WgStatus, *mut WgScenario) {
    let text = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { wg_scenario_from_json(text.as_ptr(), &mut out) };
    (status, out)
}

const BASE: &str = r#"{"domain": {"L": 1, "N": 50, "t_final": 5}, "g": "identity",
  "F": {"kind": "tanh_antidamping", "params": {"q": QQ}},
  "init": {"kind": "gaussian_bump", "params": {"amplitude": 1, "center": 0.5, "width": 0.1}}}"#;

#[test]
fn statuses_match_exit_codes() {
    let (status, s) = scenario(&BASE.replace("QQ", "0.6"));
    assert_eq!(status, WgStatus::Ok);
    let mut cert = ptr::null_mut();
    assert_eq!(unsafe { wg_certify(s, &mut cert) }, WgStatus::HypothesisViolated);
    assert!(cert.is_null());
    let msg = unsafe { CStr::from_ptr(wg_last_error_message()) }.to_str().unwrap();
    assert!(msg.contains("q"), "{msg}");

    let dir = tempfile::tempdir().unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut code = -1;
    assert_eq!(unsafe { wg_verify(s, out.as_ptr(), &mut code) }, WgStatus::Ok);
    assert_eq!(code, 2);
    unsafe { wg_scenario_free(s) };

    let (status, s) = scenario("{");
    assert_eq!(status, WgStatus::ConfigError);
    assert!(s.is_null());
}

#[test]
fn success_clears_last_error_and_buffers_round_trip() {
    let (_, bad) = scenario("[]");
    assert!(bad.is_null());
    let (status, s) = scenario(&BASE.replace("QQ", "0.3"));
    assert_eq!(status, WgStatus::Ok);
    assert!(wg_last_error_message().is_null());

    let mut traj = ptr::null_mut();
    assert_eq!(unsafe { wg_simulate(s, &mut traj) }, WgStatus::Ok);
    let mut nodes = 0;
    assert_eq!(unsafe { wg_scenario_n_nodes(s, &mut nodes) }, WgStatus::Ok);
    let (mut u, mut v) = (vec![f64::NAN; nodes], vec![f64::NAN; nodes]);
    let status = unsafe { wg_trajectory_final_state(traj, u.as_mut_ptr(), v.as_mut_ptr(), nodes) };
    assert_eq!(status, WgStatus::Ok);
    assert!(u.iter().chain(&v).all(|x| x.is_finite()));
    let mut dt = 0.0;
    assert_eq!(unsafe { wg_trajectory_dt(traj, &mut dt) }, WgStatus::Ok);
    // whole number of steps to t_final, at or below the CFL step
    let steps = (5.0f64 / (0.9 / 50.0)).ceil();
    assert!((dt - 5.0 / steps).abs() < 1e-15);

    assert_eq!(unsafe { wg_trajectory_len(ptr::null(), &mut nodes) }, WgStatus::NullPointer);
    unsafe {
        wg_trajectory_free(traj);
        wg_scenario_free(s);
        wg_scenario_free(ptr::null_mut());
    }
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(wg_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
