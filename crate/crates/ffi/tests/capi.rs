use std::ffi::CStr;
use std::path::PathBuf;
use std::ptr;

use rhlab_ffi::*;

fn params(m: u64, mode: RhlabMode) -> *mut RhlabParams {
    let mut p = ptr::null_mut();
    assert_eq!(rhlab_params_new(1.5, 0.05, m, mode, &mut p), RhlabStatus::Ok);
    assert!(!p.is_null());
    p
}

fn last_error() -> String {
    let e = rhlab_last_error();
    assert!(!e.is_null());
    unsafe { CStr::from_ptr(e) }.to_string_lossy().into_owned()
}

fn values(k: *const RhlabKernel) -> (i64, Vec<f64>) {
    let (mut base, mut len) = (0i64, 0usize);
    assert_eq!(rhlab_kernel_window(k, &mut base, &mut len), RhlabStatus::Ok);
    let mut v = vec![0.0; len];
    assert_eq!(rhlab_kernel_values(k, v.as_mut_ptr(), len), RhlabStatus::Ok);
    (base, v)
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(rhlab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn params_validation_and_scales() {
    let mut p = ptr::null_mut();
    assert_eq!(rhlab_params_new(1.5, 0.4, 4096, RhlabMode::Gap, &mut p), RhlabStatus::InvalidParams);
    assert!(p.is_null());
    assert!(last_error().contains("delta"), "{}", last_error());

    let p = params(1 << 14, RhlabMode::Gap);
    let mut len = 0usize;
    assert_eq!(rhlab_params_scales(p, ptr::null_mut(), 0, &mut len), RhlabStatus::Ok);
    assert_eq!(len, 2);
    let mut s = vec![0u64; len];
    assert_eq!(rhlab_params_scales(p, s.as_mut_ptr(), 1, &mut len), RhlabStatus::InvalidArgument);
    assert_eq!(rhlab_params_scales(p, s.as_mut_ptr(), s.len(), &mut len), RhlabStatus::Ok);
    assert_eq!(s, vec![128, 16384]);
    unsafe { rhlab_params_free(p) };
}

#[test]
fn assembled_operator_is_odd_with_disjoint_bands() {
    let p = params(1 << 12, RhlabMode::Gap);
    let mut h = ptr::null_mut();
    assert_eq!(rhlab_assemble(p, RhlabPart::H, &mut h), RhlabStatus::Ok);
    let (base, v) = values(h);
    assert_eq!(base, -(v.len() as i64 - 1) / 2);
    assert_eq!(rhlab_kernel_get(h, 0), 0.0);
    for x in 1..200 {
        assert_eq!(rhlab_kernel_get(h, x), -rhlab_kernel_get(h, -x));
    }
    let (mut minus, mut plus) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(rhlab_assemble(p, RhlabPart::Minus, &mut minus), RhlabStatus::Ok);
    assert_eq!(rhlab_assemble(p, RhlabPart::Plus, &mut plus), RhlabStatus::Ok);
    let mut prod = ptr::null_mut();
    assert_eq!(rhlab_convolve(plus, minus, &mut prod), RhlabStatus::Ok);
    assert_eq!(rhlab_kernel_get(prod, 0), 0.0);
    let mut norm = 0.0;
    assert_eq!(rhlab_op_norm(h, &mut norm), RhlabStatus::Ok);
    assert!(norm > 0.0 && norm.is_finite());
    unsafe {
        rhlab_kernel_free(h);
        rhlab_kernel_free(minus);
        rhlab_kernel_free(plus);
        rhlab_kernel_free(prod);
        rhlab_params_free(p);
    }

    let full = params(1 << 10, RhlabMode::Full);
    let mut k = ptr::null_mut();
    assert_eq!(rhlab_assemble(full, RhlabPart::Minus, &mut k), RhlabStatus::InvalidArgument);
    unsafe { rhlab_params_free(full) };
}

#[test]
fn kernel_round_trip_convolution_and_weak_norm() {
    let vals = [1.0, 0.0, -3.0];
    let (mut a, mut d) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(rhlab_kernel_new(-1, vals.as_ptr(), vals.len(), &mut a), RhlabStatus::Ok);
    assert_eq!(values(a), (-1, vals.to_vec()));
    let one = [1.0];
    assert_eq!(rhlab_kernel_new(2, one.as_ptr(), 1, &mut d), RhlabStatus::Ok);
    let mut c = ptr::null_mut();
    assert_eq!(rhlab_convolve(a, d, &mut c), RhlabStatus::Ok);
    assert_eq!(values(c), (1, vals.to_vec()));
    // distribution of |K| = {1, 3}: sup_t t #{|K| > t} = max(1 * 2, 3 * 1)
    let mut w = 0.0;
    assert_eq!(rhlab_weak_l1(a, &mut w), RhlabStatus::Ok);
    assert_eq!(w, 3.0);
    let mut small = [0.0; 2];
    assert_eq!(rhlab_kernel_values(a, small.as_mut_ptr(), 2), RhlabStatus::InvalidArgument);
    unsafe {
        rhlab_kernel_free(a);
        rhlab_kernel_free(c);
        rhlab_kernel_free(d);
    }
}

#[test]
fn block_report_matches_two_point_example() {
    // K = delta_1 - delta_-1 at s = 2: mean 0, D_iii = sqrt(2 * 2) = 2
    let vals = [-1.0, 0.0, 1.0];
    let mut k = ptr::null_mut();
    assert_eq!(rhlab_kernel_new(-1, vals.as_ptr(), 3, &mut k), RhlabStatus::Ok);
    let mut r = std::mem::MaybeUninit::<RhlabBlockReport>::uninit();
    assert_eq!(rhlab_check_block(k, 2, 0.5, r.as_mut_ptr()), RhlabStatus::Ok);
    let r = unsafe { r.assume_init() };
    assert!(r.mean_free && r.supported);
    assert_eq!(r.d_iii, 2.0);
    assert_eq!(r.overhang, 0.0);
    let mut r2 = std::mem::MaybeUninit::<RhlabBlockReport>::uninit();
    assert_eq!(rhlab_check_block(k, 3, 0.5, r2.as_mut_ptr()), RhlabStatus::InvalidParams);
    unsafe { rhlab_kernel_free(k) };
}

#[test]
fn resolvent_inverts_the_operator() {
    let p = params(1 << 10, RhlabMode::Gap);
    let mut r = ptr::null_mut();
    assert_eq!(rhlab_resolvent(p, 1.0, 0.0, &mut r), RhlabStatus::Ok);
    let (mut base, mut len) = (0i64, 0usize);
    assert_eq!(rhlab_complex_kernel_window(r, &mut base, &mut len), RhlabStatus::Ok);
    let mut re = vec![0.0; len];
    let mut im = vec![0.0; len];
    assert_eq!(rhlab_complex_kernel_values(r, re.as_mut_ptr(), im.as_mut_ptr(), len), RhlabStatus::Ok);
    let mut h = ptr::null_mut();
    assert_eq!(rhlab_assemble(p, RhlabPart::H, &mut h), RhlabStatus::Ok);
    let (hb, hv) = values(h);
    // ((1 + H) * R)(x) near the origin, by direct summation
    for x in -20i64..=20 {
        let at = |v: &[f64], y: i64| {
            let i = y - base;
            if i < 0 || i >= v.len() as i64 { 0.0 } else { v[i as usize] }
        };
        let mut s_re = at(&re, x);
        let mut s_im = at(&im, x);
        for (i, hy) in hv.iter().enumerate() {
            let y = hb + i as i64;
            s_re += hy * at(&re, x - y);
            s_im += hy * at(&im, x - y);
        }
        let expect = if x == 0 { 1.0 } else { 0.0 };
        assert!((s_re - expect).abs() < 1e-10 && s_im.abs() < 1e-10, "x = {x}: {s_re} {s_im}");
    }
    let mut bad = ptr::null_mut();
    assert_eq!(rhlab_resolvent(p, 0.0, 0.0, &mut bad), RhlabStatus::Numerical);
    assert!(last_error().contains("margin"), "{}", last_error());
    unsafe {
        rhlab_complex_kernel_free(r);
        rhlab_kernel_free(h);
        rhlab_params_free(p);
    }
}

#[test]
fn null_handles_are_rejected() {
    let mut out = ptr::null_mut();
    assert_eq!(rhlab_assemble(ptr::null(), RhlabPart::H, &mut out), RhlabStatus::InvalidArgument);
    assert!(last_error().contains("null"));
    let p = params(1 << 10, RhlabMode::Gap);
    assert_eq!(rhlab_assemble(p, RhlabPart::H, ptr::null_mut()), RhlabStatus::InvalidArgument);
    assert_eq!(rhlab_kernel_get(ptr::null(), 0), 0.0);
    unsafe {
        rhlab_kernel_free(ptr::null_mut());
        rhlab_params_free(p);
    }
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include").join("rhlab.h")
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "rhlab_params_new",
        "rhlab_assemble",
        "rhlab_block_kernel",
        "rhlab_kernel_values",
        "rhlab_convolve",
        "rhlab_op_norm",
        "rhlab_weak_l1",
        "rhlab_resolvent",
        "rhlab_check_block",
        "rhlab_last_error",
        "typedef struct RhlabKernel RhlabKernel",
        "RHLAB_STATUS_INVALID_PARAMS",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let out = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(header())
        .output()
        .expect("a C compiler is on PATH");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
