use std::ffi::{CStr, CString};
use std::ptr;

use dehnlab_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(dl_last_error_message()) }.to_string_lossy().into_owned()
}

fn group(id: &str) -> *mut DlGroup {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { dl_group_new(c(id).as_ptr(), &mut g) }, DlStatus::Ok);
    g
}

#[test]
fn group_lifecycle_and_errors() {
    let mut g = ptr::null_mut();
    let st = unsafe { dl_group_new(c("z9").as_ptr(), &mut g) };
    assert_eq!(st, DlStatus::UnknownGroup);
    assert!(g.is_null());
    assert!(last_error().contains("z9"));
    assert_eq!(unsafe { dl_group_new(ptr::null(), &mut g) }, DlStatus::NullPointer);

    let g = group("heis3");
    let mut arity = 0usize;
    assert_eq!(unsafe { dl_group_arity(g, &mut arity) }, DlStatus::Ok);
    assert!(last_error().is_empty());
    let mut coords = vec![0i64; arity];
    let mut len = 0usize;
    let st =
        unsafe { dl_eval_word(g, c("abAB").as_ptr(), coords.as_mut_ptr(), coords.len(), &mut len) };
    assert_eq!(st, DlStatus::Ok);
    assert_eq!(len, arity);
    assert_eq!(&coords[..2], &[0, 0]);
    assert_ne!(coords[2], 0);
    let st = unsafe { dl_eval_word(g, c("ab").as_ptr(), coords.as_mut_ptr(), 1, &mut len) };
    assert_eq!(st, DlStatus::BufferTooSmall);
    let st = unsafe { dl_eval_word(g, c("axb").as_ptr(), coords.as_mut_ptr(), arity, &mut len) };
    assert_eq!(st, DlStatus::InvalidWord);

    let mut d = 0u32;
    assert_eq!(unsafe { dl_word_metric(g, c("abAB").as_ptr(), &mut d) }, DlStatus::Ok);
    assert_eq!(d, 4);
    unsafe { dl_group_free(g) };
    unsafe { dl_group_free(ptr::null_mut()) };
}

#[test]
fn areas_and_certificates() {
    let g = group("z2");
    let mut area = 0u64;
    assert_eq!(unsafe { dl_winding_area(c("aabbAABB").as_ptr(), &mut area) }, DlStatus::Ok);
    assert_eq!(area, 4);
    assert_eq!(unsafe { dl_winding_area(c("ab").as_ptr(), &mut area) }, DlStatus::NotALoop);
    assert_eq!(unsafe { dl_centralized_area(g, c("aabbAABB").as_ptr(), &mut area) }, DlStatus::Ok);
    assert_eq!(area, 4);

    let mut cert = ptr::null_mut();
    assert_eq!(unsafe { dl_dyadic_fill(g, c("aabbAABB").as_ptr(), &mut cert) }, DlStatus::Ok);
    let mut steps = 0usize;
    assert_eq!(unsafe { dl_certificate_area(cert, &mut steps) }, DlStatus::Ok);
    assert!(steps >= 4);
    let mut valid = false;
    assert_eq!(unsafe { dl_certificate_verify(g, cert, &mut valid) }, DlStatus::Ok);
    assert!(valid);

    let mut tsv = ptr::null_mut();
    assert_eq!(unsafe { dl_certificate_to_tsv(cert, &mut tsv) }, DlStatus::Ok);
    let text = unsafe { CStr::from_ptr(tsv) }.to_str().unwrap().to_owned();
    unsafe { dl_string_free(tsv) };
    assert_eq!(text.lines().count(), steps);

    // a different target with the same steps does not verify
    let mut other = ptr::null_mut();
    let st = unsafe { dl_certificate_from_tsv(c(&text).as_ptr(), c("abAB").as_ptr(), &mut other) };
    assert_eq!(st, DlStatus::Ok);
    assert_eq!(unsafe { dl_certificate_verify(g, other, &mut valid) }, DlStatus::Ok);
    assert!(!valid);
    let st = unsafe { dl_certificate_from_tsv(c("a\t0").as_ptr(), c("abAB").as_ptr(), &mut other) };
    assert_eq!(st, DlStatus::InvalidWord);

    unsafe {
        dl_certificate_free(cert);
        dl_certificate_free(other);
        dl_group_free(g);
    }
}

#[test]
fn sampled_loops_are_reproducible_loops() {
    let g = group("heis3");
    let sample = |index: u32| {
        let mut s = ptr::null_mut();
        assert_eq!(unsafe { dl_sample_loop(g, 24, 5, index, &mut s) }, DlStatus::Ok);
        let w = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
        unsafe { dl_string_free(s) };
        w
    };
    let (a, b, other) = (sample(0), sample(0), sample(1));
    assert_eq!(a, b);
    assert_ne!(a, other);
    assert_eq!(a.len(), 24);
    let mut coords = [1i64; 8];
    let mut len = 0;
    let st = unsafe { dl_eval_word(g, c(&a).as_ptr(), coords.as_mut_ptr(), 8, &mut len) };
    assert_eq!(st, DlStatus::Ok);
    assert!(coords[..len].iter().all(|&x| x == 0));
    unsafe { dl_group_free(g) };
}

#[test]
fn unsupported_groups_report_status() {
    let g = group("fnil2-2");
    let mut cert = ptr::null_mut();
    let st = unsafe { dl_dyadic_fill(g, c("abAB").as_ptr(), &mut cert) };
    assert_eq!(st, DlStatus::Unsupported);
    assert!(cert.is_null());
    unsafe { dl_group_free(g) };
}
