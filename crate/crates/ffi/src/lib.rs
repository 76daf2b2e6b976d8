//! C ABI over `nielsen_section`.
//!
//! Objects cross the boundary as opaque handles created by `ns_*_new`-style
//! constructors and released by the matching `ns_*_free`. Every fallible
//! function returns an `NsStatus`; on failure a message is kept per thread and
//! can be fetched with `ns_last_error`. Strings returned by the library are
//! owned by the caller and released with `ns_string_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nielsen_section::charts::{ChartMap, Mat3, MapKind, Point};
use nielsen_section::cli::{cmd_verify, RunConfig};
use nielsen_section::crosshom::{self, TwistSettings, TwistVector};
use nielsen_section::curve;
use nielsen_section::freegroup::{NielsenAuto, Word};
use nielsen_section::loopclass::{self, MatrixPath};
use nielsen_section::modgroup::{self, MappingClass};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    FreeGroup = 3,
    Chart = 4,
    Curve = 5,
    LoopClass = 6,
    CrossHom = 7,
    ModGroup = 8,
    Config = 9,
    /// `ns_verify` ran but at least one check did not pass.
    CheckFailed = 10,
    Panic = 11,
}

/// An automorphism of `F_n`.
pub struct NsAuto(NielsenAuto);

/// A chart diffeomorphism `F_{i,j}`, `G_j` or sphere twist.
pub struct NsChartMap(ChartMap);

/// A mapping class `(t, φ)`.
pub struct NsMappingClass(MappingClass);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl ToString) {
    let s = CString::new(msg.to_string().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn fail(status: NsStatus, msg: impl ToString) -> NsStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning panics into `NsStatus::Panic`.
fn guard(f: impl FnOnce() -> NsStatus) -> NsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(NsStatus::Panic, msg)
        }
    }
}

unsafe fn out_handle<T>(out: *mut *mut T, value: T) -> NsStatus {
    *out = Box::into_raw(Box::new(value));
    NsStatus::Ok
}

unsafe fn out_string(out: *mut *mut c_char, s: &str) -> NsStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            NsStatus::Ok
        }
        Err(e) => fail(NsStatus::InvalidArgument, e),
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, NsStatus> {
    if s.is_null() {
        return Err(fail(NsStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s).to_str().map_err(|e| fail(NsStatus::InvalidArgument, e))
}

macro_rules! non_null {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            return fail(NsStatus::NullPointer, concat!("null pointer: ", stringify!($p)));
        })+
    };
}

/// Message of the last failure on this thread, or NULL. Free with `ns_string_free`.
#[no_mangle]
pub extern "C" fn ns_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |s| s.clone().into_raw()))
}

#[no_mangle]
pub unsafe extern "C" fn ns_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Static version string; do not free.
#[no_mangle]
pub extern "C" fn ns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub unsafe extern "C" fn ns_auto_identity(rank: usize, out: *mut *mut NsAuto) -> NsStatus {
    guard(|| {
        non_null!(out);
        match NielsenAuto::identity(rank) {
            Ok(a) => out_handle(out, NsAuto(a)),
            Err(e) => fail(NsStatus::FreeGroup, e),
        }
    })
}

/// `R_{i,j}: a_i ↦ a_i a_j`.
#[no_mangle]
pub unsafe extern "C" fn ns_auto_r(i: usize, j: usize, rank: usize, out: *mut *mut NsAuto) -> NsStatus {
    guard(|| {
        non_null!(out);
        match NielsenAuto::r(i, j, rank) {
            Ok(a) => out_handle(out, NsAuto(a)),
            Err(e) => fail(NsStatus::FreeGroup, e),
        }
    })
}

/// `I_j: a_j ↦ a_j⁻¹`.
#[no_mangle]
pub unsafe extern "C" fn ns_auto_inv(j: usize, rank: usize, out: *mut *mut NsAuto) -> NsStatus {
    guard(|| {
        non_null!(out);
        match NielsenAuto::inv(j, rank) {
            Ok(a) => out_handle(out, NsAuto(a)),
            Err(e) => fail(NsStatus::FreeGroup, e),
        }
    })
}

/// `outer ∘ inner`.
#[no_mangle]
pub unsafe extern "C" fn ns_auto_compose(outer: *const NsAuto, inner: *const NsAuto, out: *mut *mut NsAuto) -> NsStatus {
    guard(|| {
        non_null!(outer, inner, out);
        match NielsenAuto::compose(&(*outer).0, &(*inner).0) {
            Ok(a) => out_handle(out, NsAuto(a)),
            Err(e) => fail(NsStatus::FreeGroup, e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_auto_inverse(a: *const NsAuto, out: *mut *mut NsAuto) -> NsStatus {
    guard(|| {
        non_null!(a, out);
        match (*a).0.inverse() {
            Ok(b) => out_handle(out, NsAuto(b)),
            Err(e) => fail(NsStatus::FreeGroup, e),
        }
    })
}

/// Writes 1 to `out` when both automorphisms have the same generator images.
#[no_mangle]
pub unsafe extern "C" fn ns_auto_equal(a: *const NsAuto, b: *const NsAuto, out: *mut c_int) -> NsStatus {
    guard(|| {
        non_null!(a, b, out);
        *out = c_int::from((*a).0 == (*b).0);
        NsStatus::Ok
    })
}

/// Image of `a_k` as text such as `a1 a2^-1`.
#[no_mangle]
pub unsafe extern "C" fn ns_auto_image_text(a: *const NsAuto, k: usize, out: *mut *mut c_char) -> NsStatus {
    guard(|| {
        non_null!(a, out);
        match (*a).0.image(k) {
            Some(w) => out_string(out, &w.to_text()),
            None => fail(NsStatus::InvalidArgument, format!("generator {k} out of range")),
        }
    })
}

/// Applies `a` to a word given as text such as `a1 a2^-1`.
#[no_mangle]
pub unsafe extern "C" fn ns_auto_apply_text(a: *const NsAuto, word: *const c_char, out: *mut *mut c_char) -> NsStatus {
    guard(|| {
        non_null!(a, out);
        let text = match read_str(word) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match Word::parse_text(text).and_then(|w| (*a).0.apply(&w)) {
            Ok(w) => out_string(out, &w.to_text()),
            Err(e) => fail(NsStatus::FreeGroup, e),
        }
    })
}

/// All generator images, as `a1↦a1a2, a2↦a2, ..`.
#[no_mangle]
pub unsafe extern "C" fn ns_auto_render(a: *const NsAuto, out: *mut *mut c_char) -> NsStatus {
    guard(|| {
        non_null!(a, out);
        out_string(out, &(*a).0.render_images())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_auto_free(a: *mut NsAuto) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// A map with default profiles from a name such as `F1,2`, `G1` or `T1`.
#[no_mangle]
pub unsafe extern "C" fn ns_chart_map_new(name: *const c_char, out: *mut *mut NsChartMap) -> NsStatus {
    guard(|| {
        non_null!(out);
        let text = match read_str(name) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match text.parse::<MapKind>().and_then(ChartMap::standard) {
            Ok(m) => out_handle(out, NsChartMap(m)),
            Err(e) => fail(NsStatus::Chart, e),
        }
    })
}

unsafe fn read_point(p: *const f64) -> Point {
    Point::new(*p, *p.add(1), *p.add(2))
}

/// `out[0..3] = F(p[0..3])` in chart coordinates.
#[no_mangle]
pub unsafe extern "C" fn ns_chart_map_apply(map: *const NsChartMap, p: *const f64, out: *mut f64) -> NsStatus {
    guard(|| {
        non_null!(map, p, out);
        match (*map).0.apply(&read_point(p)) {
            Ok(q) => {
                for k in 0..3 {
                    *out.add(k) = q[k];
                }
                NsStatus::Ok
            }
            Err(e) => fail(NsStatus::Chart, e),
        }
    })
}

/// `out[0..9]` = the Jacobian at `p`, row-major.
#[no_mangle]
pub unsafe extern "C" fn ns_chart_map_jacobian(map: *const NsChartMap, p: *const f64, out: *mut f64) -> NsStatus {
    guard(|| {
        non_null!(map, p, out);
        match (*map).0.jacobian_analytic(&read_point(p)) {
            Ok(m) => {
                for r in 0..3 {
                    for c in 0..3 {
                        *out.add(3 * r + c) = m[(r, c)];
                    }
                }
                NsStatus::Ok
            }
            Err(e) => fail(NsStatus::Chart, e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_chart_map_free(map: *mut NsChartMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// The automorphism induced on `π₁`, read from crossing words. `samples = 0`
/// selects the default density.
#[no_mangle]
pub unsafe extern "C" fn ns_rho_of(map: *const NsChartMap, rank: usize, samples: usize, out: *mut *mut NsAuto) -> NsStatus {
    guard(|| {
        non_null!(map, out);
        let samples = if samples == 0 { curve::DEFAULT_SAMPLES } else { samples };
        match curve::rho_of_with(&(*map).0, rank, samples) {
            Ok(a) => out_handle(out, NsAuto(a)),
            Err(e) => fail(NsStatus::Curve, e),
        }
    })
}

/// Writes the twist vector (`rank` bytes, each 0 or 1) to `out`.
#[no_mangle]
pub unsafe extern "C" fn ns_twisting_of(map: *const NsChartMap, rank: usize, out: *mut u8) -> NsStatus {
    guard(|| {
        non_null!(map, out);
        match crosshom::twisting_of(&(*map).0, rank, &TwistSettings::default()) {
            Ok(t) => {
                for (k, b) in t.0.iter().enumerate() {
                    *out.add(k) = u8::from(*b);
                }
                NsStatus::Ok
            }
            Err(e) => fail(NsStatus::CrossHom, e),
        }
    })
}

/// `Z/2` class of the loop through `count` row-major 3×3 matrices sampled
/// at `t = k / (count - 1)`, interpolated linearly in between.
#[no_mangle]
pub unsafe extern "C" fn ns_loop_class_sampled(matrices: *const f64, count: usize, out: *mut c_int) -> NsStatus {
    guard(|| {
        non_null!(matrices, out);
        if count < 2 {
            return fail(NsStatus::InvalidArgument, "need at least two samples");
        }
        let mats: Vec<Mat3> = std::slice::from_raw_parts(matrices, 9 * count)
            .chunks_exact(9)
            .map(Mat3::from_row_slice)
            .collect();
        let last = count - 1;
        let path = MatrixPath::new(move |t| {
            let x = t.clamp(0.0, 1.0) * last as f64;
            let k = (x.floor() as usize).min(last - 1);
            let w = x - k as f64;
            mats[k] * (1.0 - w) + mats[k + 1] * w
        })
        .with_grid(last);
        match loopclass::loop_class(&path) {
            Ok(c) => {
                *out = c_int::from(c.bit());
                NsStatus::Ok
            }
            Err(e) => fail(NsStatus::LoopClass, e),
        }
    })
}

/// `s(φ) = (0, φ)`.
#[no_mangle]
pub unsafe extern "C" fn ns_class_section(a: *const NsAuto, out: *mut *mut NsMappingClass) -> NsStatus {
    guard(|| {
        non_null!(a, out);
        out_handle(out, NsMappingClass(modgroup::section(&(*a).0)))
    })
}

/// Builds `(t, φ)` from `rank` twist bytes (0 or 1) and an automorphism of that rank.
#[no_mangle]
pub unsafe extern "C" fn ns_class_new(twist: *const u8, a: *const NsAuto, out: *mut *mut NsMappingClass) -> NsStatus {
    guard(|| {
        non_null!(twist, a, out);
        let rank = (*a).0.rank();
        let bits = std::slice::from_raw_parts(twist, rank);
        if bits.iter().any(|b| *b > 1) {
            return fail(NsStatus::InvalidArgument, "twist bytes must be 0 or 1");
        }
        match MappingClass::new(TwistVector(bits.iter().map(|b| *b == 1).collect()), (*a).0.clone()) {
            Ok(c) => out_handle(out, NsMappingClass(c)),
            Err(e) => fail(NsStatus::ModGroup, e),
        }
    })
}

/// The sphere twist about `A_k`.
#[no_mangle]
pub unsafe extern "C" fn ns_class_sphere_twist(rank: usize, k: usize, out: *mut *mut NsMappingClass) -> NsStatus {
    guard(|| {
        non_null!(out);
        match MappingClass::sphere_twist(rank, k) {
            Ok(c) => out_handle(out, NsMappingClass(c)),
            Err(e) => fail(NsStatus::ModGroup, e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_class_multiply(
    a: *const NsMappingClass,
    b: *const NsMappingClass,
    out: *mut *mut NsMappingClass,
) -> NsStatus {
    guard(|| {
        non_null!(a, b, out);
        match modgroup::multiply(&(*a).0, &(*b).0) {
            Ok(c) => out_handle(out, NsMappingClass(c)),
            Err(e) => fail(NsStatus::ModGroup, e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_class_inverse(a: *const NsMappingClass, out: *mut *mut NsMappingClass) -> NsStatus {
    guard(|| {
        non_null!(a, out);
        match (*a).0.inverse() {
            Ok(c) => out_handle(out, NsMappingClass(c)),
            Err(e) => fail(NsStatus::ModGroup, e),
        }
    })
}

/// `ρ`: the automorphism component.
#[no_mangle]
pub unsafe extern "C" fn ns_class_project(a: *const NsMappingClass, out: *mut *mut NsAuto) -> NsStatus {
    guard(|| {
        non_null!(a, out);
        out_handle(out, NsAuto(modgroup::project(&(*a).0)))
    })
}

/// Writes the twist component (`rank` bytes) to `out`.
#[no_mangle]
pub unsafe extern "C" fn ns_class_twist(a: *const NsMappingClass, out: *mut u8) -> NsStatus {
    guard(|| {
        non_null!(a, out);
        for (k, b) in (*a).0.twist().0.iter().enumerate() {
            *out.add(k) = u8::from(*b);
        }
        NsStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_class_is_identity(a: *const NsMappingClass, out: *mut c_int) -> NsStatus {
    guard(|| {
        non_null!(a, out);
        *out = c_int::from((*a).0.is_identity());
        NsStatus::Ok
    })
}

/// Text form `twist=010 ; a1↦a1a2, ..`.
#[no_mangle]
pub unsafe extern "C" fn ns_class_render(a: *const NsMappingClass, out: *mut *mut c_char) -> NsStatus {
    guard(|| {
        non_null!(a, out);
        out_string(out, &(*a).0.to_string())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ns_class_free(a: *mut NsMappingClass) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Runs every check at default settings for rank `n` and seed `seed`. The
/// JSON report goes to `report` (may be NULL). Returns `CheckFailed` when a
/// check does not pass.
#[no_mangle]
pub unsafe extern "C" fn ns_verify(n: usize, seed: u64, report: *mut *mut c_char) -> NsStatus {
    guard(|| {
        let cfg = RunConfig { n, seed, timing: false, ..RunConfig::default() };
        let r = match cmd_verify(&cfg) {
            Ok(r) => r,
            Err(e) => return fail(NsStatus::Config, e),
        };
        if !report.is_null() {
            let s = out_string(report, &r.to_json());
            if s != NsStatus::Ok {
                return s;
            }
        }
        if r.passed {
            NsStatus::Ok
        } else {
            fail(NsStatus::CheckFailed, "at least one check failed")
        }
    })
}
