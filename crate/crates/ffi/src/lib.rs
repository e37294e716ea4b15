//! C interface to `tropfan`.
//!
//! Fans travel across the boundary as opaque `TfFan` handles created from
//! the JSON fan format. Every entry point returns a `TfStatus`; on failure
//! `tf_last_error` gives the message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tropfan::balancing::{is_balanced, product_weight, Weight};
use tropfan::chow::{pd_check, subdivision_weight, ChowRing, Coefficients};
use tropfan::kahler::hr_check;
use tropfan::matroid::{bergman_fan, Matroid};
use tropfan::piecewise::tropical_modification;
use tropfan::{io, Error, Fan};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidFan = 4,
    InvalidFunction = 5,
    InvalidMatroid = 6,
    /// Poincaré duality over Q fails, so HR is undefined.
    PdFails = 7,
    BufferTooSmall = 8,
    Other = 9,
    Panic = 10,
}

/// Simplicial fan with its orientation.
pub struct TfFan {
    fan: Fan,
    weight: Weight,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TfStatus {
    match e {
        Error::Parse(_) => TfStatus::Parse,
        Error::InvalidFunction(_) | Error::NotMeromorphic(_) => TfStatus::InvalidFunction,
        Error::EmptyBases
        | Error::ExchangeFails(..)
        | Error::InvalidMatroid(_)
        | Error::HasLoop(_)
        | Error::LoopBasepoint(_)
        | Error::OverlappingSets => TfStatus::InvalidMatroid,
        Error::PDFails => TfStatus::PdFails,
        Error::NotAFan(_)
        | Error::InvalidFan(_)
        | Error::DuplicateRay(_)
        | Error::NonSimplicialCone(_)
        | Error::ConeNotInFan(_)
        | Error::ConeTooSmall
        | Error::RayNotInteriorToCone
        | Error::NotABlowup(_)
        | Error::DimensionMismatch(..) => TfStatus::InvalidFan,
        _ => TfStatus::Other,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (TfStatus, String)>) -> TfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TfStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            TfStatus::Panic
        }
    }
}

fn lib(e: Error) -> (TfStatus, String) {
    (status_of(&e), e.to_string())
}

fn null() -> (TfStatus, String) {
    (TfStatus::NullPointer, "null pointer argument".into())
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, (TfStatus, String)> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|e| (TfStatus::InvalidUtf8, e.to_string()))
}

unsafe fn fan_arg<'a>(p: *const TfFan) -> Result<&'a TfFan, (TfStatus, String)> {
    p.as_ref().ok_or_else(null)
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), (TfStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

unsafe fn put_fan(out: *mut *mut TfFan, fan: Fan, weight: Weight) -> Result<(), (TfStatus, String)> {
    put(out, Box::into_raw(Box::new(TfFan { fan, weight })))
}

/// Message of the last failed call on this thread, or null. Owned by the
/// library and valid until the next failing call.
#[no_mangle]
pub extern "C" fn tf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a fan from JSON. Without a `weights` key the orientation is 1.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tf_fan_from_json(json: *const c_char, out: *mut *mut TfFan) -> TfStatus {
    guard(|| {
        let text = str_arg(json)?;
        let (fan, w) = io::fan_from_json(&io::parse_json(text).map_err(lib)?).map_err(lib)?;
        let weight = io::weight_or_reduced(&fan, w);
        put_fan(out, fan, weight)
    })
}

/// Canonical JSON of a fan; release it with `tf_string_free`.
///
/// # Safety
/// `fan` must come from this library and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tf_fan_to_json(fan: *const TfFan, out: *mut *mut c_char) -> TfStatus {
    guard(|| {
        let f = fan_arg(fan)?;
        let s = io::canonical(&io::fan_to_json(&f.fan, Some(&f.weight)));
        put(out, CString::new(s).expect("json has no nul").into_raw())
    })
}

/// # Safety
/// `fan` must come from this library (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tf_fan_free(fan: *mut TfFan) {
    if !fan.is_null() {
        drop(Box::from_raw(fan));
    }
}

/// # Safety
/// `s` must come from this library (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Ambient rank, dimension and number of rays.
///
/// # Safety
/// `fan` must come from this library; the outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn tf_fan_shape(fan: *const TfFan, rank: *mut usize, dim: *mut usize, rays: *mut usize) -> TfStatus {
    guard(|| {
        let f = fan_arg(fan)?;
        put(rank, f.fan.rank())?;
        put(dim, f.fan.dim())?;
        put(rays, f.fan.n_rays())
    })
}

/// # Safety
/// `fan` must come from this library and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tf_is_balanced(fan: *const TfFan, out: *mut bool) -> TfStatus {
    guard(|| {
        let f = fan_arg(fan)?;
        put(out, is_balanced(&f.fan, &f.weight).map_err(lib)?)
    })
}

/// Free ranks of the Chow ring in degrees `0..=dim`. `len` receives the
/// number of degrees; when it exceeds `cap` nothing is written to `ranks`
/// and `BufferTooSmall` is returned.
///
/// # Safety
/// `fan` must come from this library, `ranks` must hold `cap` entries.
#[no_mangle]
pub unsafe extern "C" fn tf_chow_ranks(fan: *const TfFan, ranks: *mut usize, cap: usize, len: *mut usize) -> TfStatus {
    guard(|| {
        let f = fan_arg(fan)?;
        let ring = ChowRing::with_weight(&f.fan, &f.weight, Coefficients::Q).map_err(lib)?;
        let r = ring.ranks();
        put(len, r.len())?;
        if r.len() > cap {
            return Err((TfStatus::BufferTooSmall, format!("need {} entries", r.len())));
        }
        if ranks.is_null() {
            return Err(null());
        }
        ptr::copy_nonoverlapping(r.as_ptr(), ranks, r.len());
        Ok(())
    })
}

/// Poincaré duality over Z (`rational = false`) or Q.
///
/// # Safety
/// `fan` must come from this library and `holds` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tf_pd_check(fan: *const TfFan, rational: bool, holds: *mut bool) -> TfStatus {
    guard(|| {
        let f = fan_arg(fan)?;
        let mode = if rational { Coefficients::Q } else { Coefficients::Z };
        let ring = ChowRing::with_weight(&f.fan, &f.weight, mode).map_err(lib)?;
        put(holds, pd_check(&ring).map_err(lib)?.holds)
    })
}

/// Hodge-Riemann relations for `ℓ(f)`, `f` in the function JSON format.
/// `signatures` receives `plus - minus` for `k = 0..=dim/2` when it has room.
///
/// # Safety
/// `fan` must come from this library, `function` must be nul-terminated and
/// `signatures` must hold `cap` entries.
#[no_mangle]
pub unsafe extern "C" fn tf_hr_check(
    fan: *const TfFan,
    function: *const c_char,
    pass: *mut bool,
    signatures: *mut i64,
    cap: usize,
    len: *mut usize,
) -> TfStatus {
    guard(|| {
        let f = fan_arg(fan)?;
        let g = io::function_from_json(&io::parse_json(str_arg(function)?).map_err(lib)?).map_err(lib)?;
        let ring = ChowRing::with_weight(&f.fan, &f.weight, Coefficients::Q).map_err(lib)?;
        let hr = hr_check(&ring, &ring.ell(&g).map_err(lib)?).map_err(lib)?;
        put(pass, hr.pass)?;
        put(len, hr.degrees.len())?;
        if !signatures.is_null() {
            for (i, d) in hr.degrees.iter().take(cap).enumerate() {
                signatures.add(i).write(d.signature.value());
            }
        }
        Ok(())
    })
}

/// Bergman fan of the uniform matroid `U_{r,n}`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tf_bergman_uniform(r: usize, n: usize, out: *mut *mut TfFan) -> TfStatus {
    guard(|| {
        let b = bergman_fan(&Matroid::uniform(r, n).map_err(lib)?).map_err(lib)?;
        put_fan(out, b.fan, b.weight)
    })
}

/// # Safety
/// Both fans must come from this library and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tf_product(a: *const TfFan, b: *const TfFan, out: *mut *mut TfFan) -> TfStatus {
    guard(|| {
        let (a, b) = (fan_arg(a)?, fan_arg(b)?);
        let p = a.fan.product(&b.fan);
        let w = product_weight(&a.fan, &a.weight, &b.fan, &b.weight, &p);
        put_fan(out, p, w)
    })
}

/// Stellar subdivision at the cone with the given ray indices; the new ray
/// is the sum of the cone's rays and gets the last index.
///
/// # Safety
/// `fan` must come from this library, `cone` must hold `len` entries and
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tf_blowup(fan: *const TfFan, cone: *const usize, len: usize, out: *mut *mut TfFan) -> TfStatus {
    guard(|| {
        let f = fan_arg(fan)?;
        if cone.is_null() && len > 0 {
            return Err(null());
        }
        let sigma: Vec<usize> = if len == 0 { Vec::new() } else { std::slice::from_raw_parts(cone, len).to_vec() };
        let sub = f.fan.stellar_subdivide(&sigma, None).map_err(lib)?;
        let w = subdivision_weight(&f.fan, &f.weight, &sigma, &sub).map_err(lib)?;
        put_fan(out, sub, w)
    })
}

/// Tropical modification along `f`, given in the function JSON format.
///
/// # Safety
/// `fan` must come from this library, `function` must be nul-terminated and
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tf_tropmod(fan: *const TfFan, function: *const c_char, out: *mut *mut TfFan) -> TfStatus {
    guard(|| {
        let f = fan_arg(fan)?;
        let g = io::function_from_json(&io::parse_json(str_arg(function)?).map_err(lib)?).map_err(lib)?;
        let m = tropical_modification(&f.fan, &f.weight, &g).map_err(lib)?;
        put_fan(out, m.fan, m.weight)
    })
}
