use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use kherd_ffi::*;

fn last_error() -> String {
    let p = kherd_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn gaussian(sigma: f64) -> KherdKernel {
    KherdKernel {
        kind: KherdKernelKind::Gaussian,
        sigma,
        degree: 0,
        offset: 0.0,
    }
}

unsafe fn line(xs: &[f64]) -> *mut KherdDataset {
    let mut ds = ptr::null_mut();
    assert_eq!(kherd_dataset_new(xs.as_ptr(), xs.len(), 1, &mut ds), KherdStatus::Ok);
    ds
}

#[test]
fn three_point_trace_through_the_abi() {
    unsafe {
        let ds = line(&[0.0, 1.0, 2.0]);
        assert_eq!((kherd_dataset_n(ds), kherd_dataset_d(ds)), (3, 1));
        let mut ctx = ptr::null_mut();
        assert_eq!(kherd_context_new(ds, gaussian(1.0), false, &mut ctx), KherdStatus::Ok);
        kherd_dataset_free(ds);

        let mut idx = [usize::MAX; 2];
        let mut value = f64::NAN;
        assert_eq!(kherd_gkhr(ctx, 2, 1.0, idx.as_mut_ptr(), &mut value), KherdStatus::Ok);
        assert_eq!(idx, [1, 0]);
        let mut again = f64::NAN;
        assert_eq!(kherd_alpha_mmd_sq(ctx, idx.as_ptr(), 2, 1.0, &mut again), KherdStatus::Ok);
        assert_eq!(value, again);

        let best = [0usize, 2];
        let mut v = f64::NAN;
        assert_eq!(kherd_mmd_sq(ctx, best.as_ptr(), 2, &mut v), KherdStatus::Ok);
        assert!((v - 0.0859332152334981).abs() < 1e-12);

        let mut three = [0usize; 3];
        assert_eq!(kherd_gkh(ctx, 3, 0.0, three.as_mut_ptr(), ptr::null_mut()), KherdStatus::Ok);
        assert_eq!(&three[..2], &[0, 2]);
        assert!(kherd_context_kbar(ctx) > 0.0);
        kherd_context_free(ctx);
    }
}

#[test]
fn median_bandwidth_and_errors() {
    unsafe {
        let ds = line(&[0.0, 1.0, 3.0]);
        let mut s = 0.0;
        assert_eq!(kherd_median_bandwidth(ds, &mut s), KherdStatus::Ok);
        assert_eq!(s, 2.0);
        assert!(kherd_last_error().is_null());

        let mut ctx = ptr::null_mut();
        assert_eq!(
            kherd_context_new(ds, gaussian(-1.0), false, &mut ctx),
            KherdStatus::InvalidInput
        );
        assert!(ctx.is_null());
        assert!(last_error().contains("bandwidth"));

        assert_eq!(kherd_context_new(ds, gaussian(1.0), true, &mut ctx), KherdStatus::Ok);
        let mut idx = [0usize; 4];
        assert_eq!(
            kherd_gkhr(ctx, 4, 0.5, idx.as_mut_ptr(), ptr::null_mut()),
            KherdStatus::BudgetExceedsGroundSet
        );
        assert_eq!(
            kherd_gkhr(ctx, 2, 1.5, idx.as_mut_ptr(), ptr::null_mut()),
            KherdStatus::InvalidInput
        );
        assert_eq!(
            kherd_gkhr(ctx, 2, 0.5, ptr::null_mut(), ptr::null_mut()),
            KherdStatus::NullPointer
        );
        let bad = [7usize];
        let mut v = 0.0;
        assert_eq!(
            kherd_alpha_mmd_sq(ctx, bad.as_ptr(), 1, 0.5, &mut v),
            KherdStatus::InvalidInput
        );
        assert_eq!(kherd_median_bandwidth(ptr::null(), &mut s), KherdStatus::NullPointer);
        kherd_context_free(ctx);

        let same = line(&[4.0, 4.0]);
        assert_eq!(kherd_median_bandwidth(same, &mut s), KherdStatus::Numerical);
        kherd_dataset_free(same);
        kherd_dataset_free(ds);
        kherd_dataset_free(ptr::null_mut());
    }
}

#[test]
fn load_from_file() {
    let dir = std::env::temp_dir().join(format!("kherd-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("pts.csv");
    std::fs::write(&csv, "x,y\n0,0\n1,0\n0,1\n").unwrap();
    unsafe {
        let mut ds = ptr::null_mut();
        let path = CString::new(csv.to_str().unwrap()).unwrap();
        assert_eq!(kherd_dataset_load(path.as_ptr(), &mut ds), KherdStatus::Ok);
        assert_eq!((kherd_dataset_n(ds), kherd_dataset_d(ds)), (3, 2));
        kherd_dataset_free(ds);

        let missing = CString::new(dir.join("missing.csv").to_str().unwrap()).unwrap();
        assert_eq!(kherd_dataset_load(missing.as_ptr(), &mut ds), KherdStatus::Io);
        let nan = [f64::NAN];
        assert_eq!(kherd_dataset_new(nan.as_ptr(), 1, 1, &mut ds), KherdStatus::Numerical);
    }
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/kherd.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "kherd_gkhr",
        "kherd_gkh",
        "kherd_context_new",
        "kherd_alpha_mmd_sq",
        "kherd_last_error",
    ] {
        assert!(text.contains(&format!("{f}(")), "{f} missing from header");
    }
    // Syntax-check with whatever C compiler is on PATH; skip if none.
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .status()
    else {
        return;
    };
    assert!(status.success());
}
