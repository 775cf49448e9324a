//! C ABI over the dehnlab core.
//!
//! Every fallible call returns a [`DlStatus`]; on failure a message is kept
//! per thread and read with [`dl_last_error_message`]. Handles are opaque and
//! released with their `_free` function. Strings returned to the caller are
//! released with [`dl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dehnlab::estimator::sample_index;
use dehnlab::filling::{
    centralized_area, dyadic_fill, verify_certificate, winding_area, FillingCertificate,
};
use dehnlab::group::metric::Metric;
use dehnlab::walk::sampler::DEFAULT_MAX_ATTEMPTS;
use dehnlab::walk::{LoopSampler, SamplerKind, TableOptions};
use dehnlab::{Error, GroupSpec, LazyWord};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownGroup = 3,
    InvalidWord = 4,
    NotALoop = 5,
    Unsupported = 6,
    BudgetExceeded = 7,
    BufferTooSmall = 8,
    Internal = 9,
}

/// A group from the catalog.
pub struct DlGroup {
    spec: GroupSpec,
}

/// A filling certificate bound to the loop it fills.
pub struct DlCertificate {
    cert: FillingCertificate,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> DlStatus {
    match e {
        Error::UnknownGroup(_) => DlStatus::UnknownGroup,
        Error::InvalidWord(_) | Error::Parse(_) => DlStatus::InvalidWord,
        Error::NotALoop(_) => DlStatus::NotALoop,
        Error::NoExtension(_) | Error::NoFiller(_) => DlStatus::Unsupported,
        Error::BudgetExceeded { .. }
        | Error::CapExceeded { .. }
        | Error::AttemptsExhausted { .. } => DlStatus::BudgetExceeded,
        Error::Domain(_) => DlStatus::InvalidArgument,
        Error::Overflow | Error::Invariant(_) | Error::Io(_) => DlStatus::Internal,
    }
}

struct Fail(DlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DlStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DlStatus::Internal
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(DlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(DlStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn word_arg(p: *const c_char) -> Result<LazyWord, Fail> {
    Ok(str_arg(p, "word")?.parse()?)
}

unsafe fn group_arg<'a>(g: *const DlGroup) -> Result<&'a GroupSpec, Fail> {
    g.as_ref().map(|g| &g.spec).ok_or_else(|| null("group"))
}

unsafe fn out_arg<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null("output pointer"))
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(DlStatus::Internal, "string contains NUL".into()))
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn dl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a group from a catalog id such as `"z2"` or `"heis3"`.
///
/// # Safety
/// `id` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dl_group_new(id: *const c_char, out: *mut *mut DlGroup) -> DlStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let spec = GroupSpec::parse(str_arg(id, "id")?)?;
        *out = Box::into_raw(Box::new(DlGroup { spec }));
        Ok(())
    })
}

/// # Safety
/// `group` must come from [`dl_group_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dl_group_free(group: *mut DlGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// Number of normal-form coordinates of the group's elements.
///
/// # Safety
/// `group` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn dl_group_arity(group: *const DlGroup, out: *mut usize) -> DlStatus {
    guard(|| {
        *out_arg(out)? = group_arg(group)?.identity().arity();
        Ok(())
    })
}

/// Evaluates a word into normal-form coordinates. `*len` receives the arity;
/// fails with `BufferTooSmall` if `cap` is less than that.
///
/// # Safety
/// `coords` must point to at least `cap` writable values.
#[no_mangle]
pub unsafe extern "C" fn dl_eval_word(
    group: *const DlGroup,
    word: *const c_char,
    coords: *mut i64,
    cap: usize,
    len: *mut usize,
) -> DlStatus {
    guard(|| {
        let spec = group_arg(group)?;
        let g = spec.eval_word(&word_arg(word)?)?;
        let len = out_arg(len)?;
        *len = g.arity();
        if cap < g.arity() {
            return Err(Fail(DlStatus::BufferTooSmall, format!("need {} coordinates", g.arity())));
        }
        if coords.is_null() {
            return Err(null("coords"));
        }
        std::slice::from_raw_parts_mut(coords, g.arity()).copy_from_slice(g.coords());
        Ok(())
    })
}

/// Word-metric distance from the identity to the element a word represents.
///
/// # Safety
/// Pointers must be valid; `word` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn dl_word_metric(
    group: *const DlGroup,
    word: *const c_char,
    out: *mut u32,
) -> DlStatus {
    guard(|| {
        let spec = group_arg(group)?;
        let w = word_arg(word)?;
        let g = spec.eval_word(&w)?;
        let cap = w.without_lazy().len().max(1) as u32;
        *out_arg(out)? = Metric::new(spec, cap)?.norm(&g)?;
        Ok(())
    })
}

/// Samples a closed lazy word of length `n`, reproducibly from
/// `(seed, index)`. The result is freed with [`dl_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_sample_loop(
    group: *const DlGroup,
    n: usize,
    seed: u64,
    index: u32,
    out: *mut *mut c_char,
) -> DlStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let spec = group_arg(group)?;
        let sampler = LoopSampler::new(
            spec,
            n,
            SamplerKind::Auto,
            DEFAULT_MAX_ATTEMPTS,
            TableOptions::default(),
        )?;
        let s = sampler.sample_indexed(seed, sample_index(n, index as u64))?;
        *out = into_c_string(s.word.to_string())?;
        Ok(())
    })
}

/// Relator-counting lower bound on the filling area of a loop.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_centralized_area(
    group: *const DlGroup,
    word: *const c_char,
    out: *mut u64,
) -> DlStatus {
    guard(|| {
        *out_arg(out)? = centralized_area(group_arg(group)?, &word_arg(word)?)?;
        Ok(())
    })
}

/// Exact filling area of a loop in the plane group `z2`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_winding_area(word: *const c_char, out: *mut u64) -> DlStatus {
    guard(|| {
        let w = word_arg(word)?;
        let z2 = GroupSpec::parse("z2")?;
        if !z2.is_loop(&w)? {
            return Err(Error::NotALoop(w.to_string()).into());
        }
        *out_arg(out)? = winding_area(&w)?;
        Ok(())
    })
}

/// Builds the dyadic filling certificate of a loop.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_dyadic_fill(
    group: *const DlGroup,
    word: *const c_char,
    out: *mut *mut DlCertificate,
) -> DlStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let cert = dyadic_fill(group_arg(group)?, &word_arg(word)?)?;
        *out = Box::into_raw(Box::new(DlCertificate { cert }));
        Ok(())
    })
}

/// Parses a certificate in TSV form for the given loop.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn dl_certificate_from_tsv(
    tsv: *const c_char,
    word: *const c_char,
    out: *mut *mut DlCertificate,
) -> DlStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let cert = FillingCertificate::from_tsv(str_arg(tsv, "tsv")?, word_arg(word)?)?;
        *out = Box::into_raw(Box::new(DlCertificate { cert }));
        Ok(())
    })
}

/// # Safety
/// `cert` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dl_certificate_free(cert: *mut DlCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// Number of relator steps.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_certificate_area(
    cert: *const DlCertificate,
    out: *mut usize,
) -> DlStatus {
    guard(|| {
        let c = cert.as_ref().ok_or_else(|| null("certificate"))?;
        *out_arg(out)? = c.cert.area();
        Ok(())
    })
}

/// Sets `*valid` to whether the certificate's product freely equals its loop.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_certificate_verify(
    group: *const DlGroup,
    cert: *const DlCertificate,
    valid: *mut bool,
) -> DlStatus {
    guard(|| {
        let c = cert.as_ref().ok_or_else(|| null("certificate"))?;
        *out_arg(valid)? = verify_certificate(group_arg(group)?, &c.cert);
        Ok(())
    })
}

/// TSV form of a certificate, freed with [`dl_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_certificate_to_tsv(
    cert: *const DlCertificate,
    out: *mut *mut c_char,
) -> DlStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let c = cert.as_ref().ok_or_else(|| null("certificate"))?;
        *out = into_c_string(c.cert.to_tsv())?;
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
