use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use rotstar_ffi::*;

fn last_error() -> String {
    let p = rs_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn lane_emden_nu_one_through_the_abi() {
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(rs_lane_emden(1.0, 1.0, 1.0, 1e-12, &mut p), RsStatus::Ok);
        assert!(rs_last_error().is_null());
        let (mut xi1, mut mu1) = (0.0, 0.0);
        assert_eq!(rs_profile_zero(p, &mut xi1, &mut mu1), RsStatus::Ok);
        assert!((xi1 - std::f64::consts::PI).abs() < 1e-8);
        assert!((mu1 - std::f64::consts::PI).abs() < 1e-8);
        let mut v = 0.0;
        assert_eq!(rs_profile_theta(p, 1.0, &mut v), RsStatus::Ok);
        assert!((v - 1.0f64.sin()).abs() < 1e-8);
        assert_eq!(
            rs_profile_theta(p, -1.0, &mut v),
            RsStatus::InvalidParameter
        );
        assert!(last_error().contains('r'));
        rs_profile_free(p);
    }
}

#[test]
fn invalid_arguments_map_to_status_codes() {
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(
            rs_lane_emden(-1.0, 1.0, 1.0, 1e-12, &mut p),
            RsStatus::InvalidParameter
        );
        assert!(p.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(
            rs_lane_emden(1.5, 1.0, 1.0, 1e-12, ptr::null_mut()),
            RsStatus::NullPointer
        );
        assert_eq!(
            rs_profile_zero(ptr::null(), ptr::null_mut(), ptr::null_mut()),
            RsStatus::NullPointer
        );
        rs_profile_free(ptr::null_mut());
        rs_solution_free(ptr::null_mut());
    }
    let v = unsafe { CStr::from_ptr(rs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn rigid_rotation_solution_is_oblate_and_admissible() {
    let mut p = ptr::null_mut();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(rs_lane_emden(1.5, 1.0, 1.0, 1e-12, &mut p), RsStatus::Ok);
        assert_eq!(
            rs_solve_rigid(p, 1e-3, 128, 16, 8, 1e-10, &mut s),
            RsStatus::Ok
        );
        let mut sum = RsSummary::default();
        assert_eq!(rs_solution_summary(s, &mut sum), RsStatus::Ok);
        assert_eq!(sum.admissible, 1);
        assert!(sum.equatorial_radius > sum.polar_radius);
        assert!(sum.oblateness > 0.0 && sum.residual < 1e-9);
        assert!(sum.hl_sigma_min > 1e-3);
        let mut count = 0usize;
        assert_eq!(
            rs_solution_boundary(s, ptr::null_mut(), ptr::null_mut(), 0, &mut count),
            RsStatus::Ok
        );
        assert_eq!(count, 16);
        let (mut z, mut r) = (vec![0.0; count], vec![0.0; count]);
        assert_eq!(
            rs_solution_boundary(s, z.as_mut_ptr(), r.as_mut_ptr(), count, &mut count),
            RsStatus::Ok
        );
        assert!(r.iter().all(|&x| x > 3.6 && x < 3.7));
        assert!(z.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(
            rs_solve_rigid(p, 1e-3, 128, 16, 7, 1e-10, &mut s),
            RsStatus::InvalidParameter
        );
        rs_solution_free(s);
        rs_profile_free(p);
    }
}

#[test]
fn header_compiles_as_c_and_links() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = crate_dir.join("include/rotstar.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in [
        "rs_lane_emden",
        "rs_solve_rigid",
        "rs_last_error",
        "RsStatus",
        "RsProfile",
        "RsSummary",
    ] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("t.c");
    std::fs::write(
        &src,
        "#include \"rotstar.h\"\n#include <stdio.h>\nint main(void) {\n  RsProfile *p = NULL;\n  \
         RsStatus s = rs_lane_emden(1.0, 1.0, 1.0, 1e-12, &p);\n  if (s != RS_STATUS_OK) return 1;\n  \
         double xi1, mu1;\n  rs_profile_zero(p, &xi1, &mu1);\n  rs_profile_free(p);\n  \
         printf(\"%.10f\\n\", xi1);\n  return 0;\n}\n",
    )
    .unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let syntax = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(crate_dir.join("include"))
        .arg(&src)
        .status();
    let Ok(syntax) = syntax else {
        eprintln!("no C compiler; header syntax check skipped");
        return;
    };
    assert!(syntax.success());
    let exe_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = exe_dir.join("librotstar_ffi.a");
    if !lib.exists() {
        eprintln!(
            "static library not found at {}; link step skipped",
            lib.display()
        );
        return;
    }
    let bin = dir.path().join("t");
    let built = Command::new(&cc)
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(built.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "3.1415926536");
}
