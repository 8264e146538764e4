//! C ABI over `fatmesh`.
//!
//! Every fallible call returns an [`FmStatus`]; on failure a message for the
//! calling thread is available from [`fm_last_error`]. Handles are opaque and
//! must be released with their matching `*_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fatmesh::alexander;
use fatmesh::chessboard::{self, ChessboardColoring};
use fatmesh::mash::{self, MashOptions, SELF_TEST_INSTANCES};
use fatmesh::{fmesh, prism, simplex, validate, Error, SimplicialComplex};

/// Result codes. Values 2 to 6 match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FmStatus {
    Ok = 0,
    NullPointer = 1,
    Input = 2,
    Geometry = 3,
    Perturbation = 4,
    Structural = 5,
    Io = 6,
    Panic = 7,
}

/// Opaque simplicial complex.
pub struct FmComplex {
    inner: SimplicialComplex,
}

/// Opaque two-coloring of a complex's top simplices.
pub struct FmColoring {
    inner: ChessboardColoring,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).expect("nul bytes were replaced"));
}

fn status_of(e: &Error) -> FmStatus {
    match e.exit_code() {
        2 => FmStatus::Input,
        3 => FmStatus::Geometry,
        4 => FmStatus::Perturbation,
        5 => FmStatus::Structural,
        _ => FmStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), FfiError>) -> FmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FmStatus::Ok,
        Ok(Err(FfiError::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            FmStatus::NullPointer
        }
        Ok(Err(FfiError::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            FmStatus::Panic
        }
    }
}

enum FfiError {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for FfiError {
    fn from(e: Error) -> Self {
        FfiError::Lib(e)
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, FfiError> {
    p.as_ref().ok_or(FfiError::Null(what))
}

unsafe fn as_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, FfiError> {
    if p.is_null() {
        return Err(FfiError::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| FfiError::Lib(Error::Input(format!("{what} is not valid UTF-8"))))
}

unsafe fn put<T>(out: *mut T, value: T, what: &'static str) -> Result<(), FfiError> {
    if out.is_null() {
        return Err(FfiError::Null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed(c: SimplicialComplex) -> *mut FmComplex {
    Box::into_raw(Box::new(FmComplex { inner: c }))
}

/// Message of the last failed call on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses FMESH text.
#[no_mangle]
pub unsafe extern "C" fn fm_complex_parse(text: *const c_char, out: *mut *mut FmComplex) -> FmStatus {
    guard(|| {
        let c = fmesh::parse(as_str(text, "text")?)?;
        put(out, boxed(c), "out")
    })
}

/// Reads an FMESH file.
#[no_mangle]
pub unsafe extern "C" fn fm_complex_read_file(path: *const c_char, out: *mut *mut FmComplex) -> FmStatus {
    guard(|| {
        let c = fmesh::read_file(as_str(path, "path")?)?;
        put(out, boxed(c), "out")
    })
}

/// Builds a complex from `num_vertices * ambient_dim` coordinates and
/// `num_simplices * vertices_per_simplex` vertex indices.
#[no_mangle]
pub unsafe extern "C" fn fm_complex_from_arrays(
    ambient_dim: usize,
    coords: *const f64,
    num_vertices: usize,
    indices: *const usize,
    num_simplices: usize,
    vertices_per_simplex: usize,
    out: *mut *mut FmComplex,
) -> FmStatus {
    guard(|| {
        if (coords.is_null() && num_vertices * ambient_dim > 0) || (indices.is_null() && num_simplices > 0) {
            return Err(FfiError::Null("coords or indices"));
        }
        let xs = if num_vertices * ambient_dim == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(coords, num_vertices * ambient_dim)
        };
        let ids = if num_simplices == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(indices, num_simplices * vertices_per_simplex)
        };
        let vertices = xs.chunks(ambient_dim.max(1)).map(<[f64]>::to_vec).collect();
        let simplices = ids.chunks(vertices_per_simplex.max(1)).map(<[usize]>::to_vec).collect();
        let c = SimplicialComplex::from_raw(ambient_dim, vertices, simplices)?;
        put(out, boxed(c), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn fm_complex_free(c: *mut FmComplex) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Ambient dimension; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn fm_complex_ambient_dim(c: *const FmComplex) -> usize {
    c.as_ref().map_or(0, |c| c.inner.ambient_dim())
}

#[no_mangle]
pub unsafe extern "C" fn fm_complex_num_vertices(c: *const FmComplex) -> usize {
    c.as_ref().map_or(0, |c| c.inner.num_vertices())
}

#[no_mangle]
pub unsafe extern "C" fn fm_complex_num_simplices(c: *const FmComplex) -> usize {
    c.as_ref().map_or(0, |c| c.inner.num_simplices())
}

/// Serializes to FMESH; release the string with [`fm_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fm_complex_to_fmesh(c: *const FmComplex, out: *mut *mut c_char) -> FmStatus {
    guard(|| {
        let text = fmesh::write(&as_ref(c, "complex")?.inner);
        let s = CString::new(text).map_err(|_| Error::Input("interior nul".into()))?;
        put(out, s.into_raw(), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn fm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Fatness of a simplex given as `num_points` points of dimension `dim`.
#[no_mangle]
pub unsafe extern "C" fn fm_simplex_fatness(points: *const f64, num_points: usize, dim: usize, out: *mut f64) -> FmStatus {
    guard(|| {
        if points.is_null() {
            return Err(FfiError::Null("points"));
        }
        if num_points == 0 || dim == 0 {
            return Err(Error::Input("empty simplex".into()).into());
        }
        let xs = std::slice::from_raw_parts(points, num_points * dim);
        let pts: Vec<&[f64]> = xs.chunks(dim).collect();
        put(out, simplex::fatness(&pts), "out")
    })
}

/// Smallest fatness over the complex's top simplices.
#[no_mangle]
pub unsafe extern "C" fn fm_complex_min_fatness(c: *const FmComplex, out: *mut f64) -> FmStatus {
    guard(|| {
        let r = simplex::fatness_report(&as_ref(c, "complex")?.inner);
        put(out, r.min_fatness, "out")
    })
}

/// Number of validity violations (0 for a geometric simplicial complex).
#[no_mangle]
pub unsafe extern "C" fn fm_complex_validate(c: *const FmComplex, violations: *mut usize) -> FmStatus {
    guard(|| {
        let v = validate::validate_complex(&as_ref(c, "complex")?.inner);
        put(violations, v.len(), "violations")
    })
}

/// Merges `k2` into `k1` over the ball of radius `eps` about vertex `v0` of
/// `k1`. `self_test_instances == 0` selects the default.
#[no_mangle]
pub unsafe extern "C" fn fm_mash(
    k1: *const FmComplex,
    k2: *const FmComplex,
    eps: f64,
    v0: usize,
    seed: u64,
    self_test_instances: usize,
    merged: *mut *mut FmComplex,
    fatness_after: *mut f64,
) -> FmStatus {
    guard(|| {
        let opts = MashOptions {
            eps,
            center_vertex: v0,
            seed,
            self_test_instances: if self_test_instances == 0 { SELF_TEST_INSTANCES } else { self_test_instances },
        };
        let r = mash::mash_with(&as_ref(k1, "k1")?.inner, &as_ref(k2, "k2")?.inner, &opts)?;
        if !fatness_after.is_null() {
            fatness_after.write(r.fatness_after);
        }
        put(merged, boxed(r.merged), "merged")
    })
}

/// Refines until interior codimension-two faces have even incidence.
#[no_mangle]
pub unsafe extern "C" fn fm_enforce_even_incidence(c: *const FmComplex, out: *mut *mut FmComplex) -> FmStatus {
    guard(|| {
        let e = chessboard::enforce_even_incidence(&as_ref(c, "complex")?.inner)?;
        put(out, boxed(e), "out")
    })
}

/// Alternating two-coloring; fails with `Structural` on an odd cycle.
#[no_mangle]
pub unsafe extern "C" fn fm_two_color(c: *const FmComplex, out: *mut *mut FmColoring) -> FmStatus {
    guard(|| {
        let col = chessboard::two_color(&as_ref(c, "complex")?.inner)?;
        put(out, Box::into_raw(Box::new(FmColoring { inner: col })), "out")
    })
}

/// Color (+1 or -1) of a top simplex.
#[no_mangle]
pub unsafe extern "C" fn fm_coloring_get(col: *const FmColoring, simplex: usize, out: *mut i8) -> FmStatus {
    guard(|| {
        let c = as_ref(col, "coloring")?
            .inner
            .color(simplex)
            .ok_or_else(|| Error::Input(format!("simplex {simplex} has no color")))?;
        put(out, c, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn fm_coloring_free(col: *mut FmColoring) {
    if !col.is_null() {
        drop(Box::from_raw(col));
    }
}

/// Largest sampled dilatation of the assembled piecewise map.
#[no_mangle]
pub unsafe extern "C" fn fm_estimate_dilatation(
    c: *const FmComplex,
    col: *const FmColoring,
    samples_per_simplex: usize,
    seed: u64,
    global_k: *mut f64,
) -> FmStatus {
    guard(|| {
        let map = alexander::assemble_global_map(&as_ref(c, "complex")?.inner, &as_ref(col, "coloring")?.inner)?;
        let est = alexander::estimate_dilatation(&map, samples_per_simplex, seed)?;
        put(global_k, est.global_k, "global_k")
    })
}

/// Staircase triangulation of `base x [0, height]`; `base` holds `k + 1`
/// points of `R^k`.
#[no_mangle]
pub unsafe extern "C" fn fm_prism_triangulate(base: *const f64, k: usize, height: f64, out: *mut *mut FmComplex) -> FmStatus {
    guard(|| {
        if base.is_null() {
            return Err(FfiError::Null("base"));
        }
        if k == 0 {
            return Err(Error::Input("base dimension must be at least 1".into()).into());
        }
        let xs = std::slice::from_raw_parts(base, (k + 1) * k);
        let pts: Vec<&[f64]> = xs.chunks(k).collect();
        let c = prism::prism_triangulate(&pts, height)?;
        put(out, boxed(c), "out")
    })
}
