//! C ABI over `kherd`.
//!
//! Every fallible function returns a [`KherdStatus`]; on failure a message is
//! kept per thread and can be read with [`kherd_last_error`]. Datasets and
//! kernel contexts are opaque handles released with their `_free` function.
//! Index buffers are `size_t` and caller-allocated.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use kherd::discrepancy::{alpha_mmd_sq, mmd_sq, AlphaParam};
use kherd::herding::{gkh, gkhr};
use kherd::kernel::{median_bandwidth, Dataset, KernelContext, KernelSpec};
use kherd::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KherdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Io = 3,
    BudgetExceedsGroundSet = 4,
    Numerical = 5,
    Parse = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KherdKernelKind {
    Gaussian = 0,
    Laplacian = 1,
    Polynomial = 2,
}

/// Kernel parameters. `sigma` is used by the gaussian and laplacian kernels,
/// `degree` and `offset` by the polynomial one.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct KherdKernel {
    pub kind: KherdKernelKind,
    pub sigma: f64,
    pub degree: u32,
    pub offset: f64,
}

/// Opaque dataset handle.
pub struct KherdDataset(Dataset);

/// Opaque kernel context handle (kernel, cached mean similarities, optional Gram matrix).
pub struct KherdContext(KernelContext);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> KherdStatus {
    match err {
        Error::InvalidInput(_) | Error::DimensionMismatch { .. } | Error::GuardExceeded { .. } => KherdStatus::InvalidInput,
        Error::NonFinite { .. } | Error::Degenerate(_) | Error::IllConditioned { .. } => KherdStatus::Numerical,
        Error::BudgetExceedsGroundSet { .. } => KherdStatus::BudgetExceedsGroundSet,
        Error::Parse { .. } | Error::Json(_) => KherdStatus::Parse,
        Error::Io { .. } => KherdStatus::Io,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), KherdFail>) -> KherdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KherdStatus::Ok,
        Ok(Err(KherdFail::Null(what))) => {
            set_error(format!("{what} is null"));
            KherdStatus::NullPointer
        }
        Ok(Err(KherdFail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            KherdStatus::Panic
        }
    }
}

enum KherdFail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for KherdFail {
    fn from(e: Error) -> Self {
        KherdFail::Lib(e)
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, KherdFail> {
    p.as_ref().ok_or(KherdFail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, KherdFail> {
    p.as_mut().ok_or(KherdFail::Null(what))
}

unsafe fn slice_in<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], KherdFail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(KherdFail::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next `kherd_*` call on the same thread.
#[no_mangle]
pub extern "C" fn kherd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies `n * d` row-major values into a new dataset.
///
/// # Safety
/// `features` must point to `n * d` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kherd_dataset_new(
    features: *const f64,
    n: usize,
    d: usize,
    out_ds: *mut *mut KherdDataset,
) -> KherdStatus {
    guard(|| {
        let slot = out(out_ds, "out")?;
        let len = n.checked_mul(d).ok_or_else(|| Error::invalid("n * d overflows"))?;
        let values = slice_in(features, len, "features")?.to_vec();
        let ds = Dataset::new(values, n, d, None)?;
        *slot = Box::into_raw(Box::new(KherdDataset(ds)));
        Ok(())
    })
}

/// Loads a CSV or RDSB file, chosen by extension.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kherd_dataset_load(path: *const c_char, out_ds: *mut *mut KherdDataset) -> KherdStatus {
    guard(|| {
        let slot = out(out_ds, "out")?;
        let path = CStr::from_ptr(deref(path, "path")?)
            .to_str()
            .map_err(|_| Error::invalid("path is not valid UTF-8"))?;
        let ds = kherd::io::load_dataset(path, None)?;
        *slot = Box::into_raw(Box::new(KherdDataset(ds)));
        Ok(())
    })
}

/// # Safety
/// `ds` must be NULL or a handle from `kherd_dataset_new`/`kherd_dataset_load`
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn kherd_dataset_free(ds: *mut KherdDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Number of points; 0 for NULL.
///
/// # Safety
/// `ds` must be NULL or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn kherd_dataset_n(ds: *const KherdDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n())
}

/// Dimension; 0 for NULL.
///
/// # Safety
/// `ds` must be NULL or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn kherd_dataset_d(ds: *const KherdDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.d())
}

/// Median pairwise Euclidean distance.
///
/// # Safety
/// `ds` must be a live dataset handle; `out_sigma` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kherd_median_bandwidth(ds: *const KherdDataset, out_sigma: *mut f64) -> KherdStatus {
    guard(|| {
        let slot = out(out_sigma, "out_sigma")?;
        *slot = median_bandwidth(&deref(ds, "dataset")?.0)?;
        Ok(())
    })
}

/// Builds a kernel context over a copy of the dataset. With `cache_gram`
/// the full n×n matrix is kept; otherwise rows are recomputed on demand.
///
/// # Safety
/// `ds` must be a live dataset handle; `out_ctx` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kherd_context_new(
    ds: *const KherdDataset,
    kernel: KherdKernel,
    cache_gram: bool,
    out_ctx: *mut *mut KherdContext,
) -> KherdStatus {
    guard(|| {
        let slot = out(out_ctx, "out")?;
        let ds = deref(ds, "dataset")?.0.clone();
        let spec = match kernel.kind {
            KherdKernelKind::Gaussian => KernelSpec::Gaussian { sigma: kernel.sigma },
            KherdKernelKind::Laplacian => KernelSpec::Laplacian { sigma: kernel.sigma },
            KherdKernelKind::Polynomial => KernelSpec::Polynomial {
                degree: kernel.degree,
                offset: kernel.offset,
            },
        };
        let ctx = KernelContext::build(ds, spec, cache_gram)?;
        *slot = Box::into_raw(Box::new(KherdContext(ctx)));
        Ok(())
    })
}

/// # Safety
/// `ctx` must be NULL or a live context handle.
#[no_mangle]
pub unsafe extern "C" fn kherd_context_free(ctx: *mut KherdContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// Mean of all pairwise kernel values; NaN for NULL.
///
/// # Safety
/// `ctx` must be NULL or a live context handle.
#[no_mangle]
pub unsafe extern "C" fn kherd_context_kbar(ctx: *const KherdContext) -> f64 {
    ctx.as_ref().map_or(f64::NAN, |c| c.0.kbar())
}

unsafe fn run_herding(
    ctx: *const KherdContext,
    m: usize,
    alpha: f64,
    replacement: bool,
    out_indices: *mut usize,
    out_value: *mut f64,
) -> KherdStatus {
    guard(|| {
        let ctx = &deref(ctx, "context")?.0;
        if out_indices.is_null() && m > 0 {
            return Err(KherdFail::Null("out_indices"));
        }
        let alpha = AlphaParam::explicit(alpha)?;
        let res = if replacement {
            gkh(ctx, m, alpha)?
        } else {
            gkhr(ctx, m, alpha)?
        };
        slice::from_raw_parts_mut(out_indices, m).copy_from_slice(&res.indices);
        if let Some(v) = out_value.as_mut() {
            *v = res.final_alpha_mmd_sq;
        }
        Ok(())
    })
}

/// Greedy selection without replacement. Writes `m` indices in selection
/// order and, if `out_value` is non-NULL, the final α-MMD².
///
/// # Safety
/// `ctx` must be a live context handle; `out_indices` must have room for `m`
/// entries; `out_value` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn kherd_gkhr(
    ctx: *const KherdContext,
    m: usize,
    alpha: f64,
    out_indices: *mut usize,
    out_value: *mut f64,
) -> KherdStatus {
    run_herding(ctx, m, alpha, false, out_indices, out_value)
}

/// Greedy selection with replacement; indices may repeat.
///
/// # Safety
/// Same contract as [`kherd_gkhr`].
#[no_mangle]
pub unsafe extern "C" fn kherd_gkh(
    ctx: *const KherdContext,
    m: usize,
    alpha: f64,
    out_indices: *mut usize,
    out_value: *mut f64,
) -> KherdStatus {
    run_herding(ctx, m, alpha, true, out_indices, out_value)
}

/// α-MMD² of the multiset `indices[0..m]`.
///
/// # Safety
/// `ctx` must be a live context handle; `indices` must point to `m` entries;
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kherd_alpha_mmd_sq(
    ctx: *const KherdContext,
    indices: *const usize,
    m: usize,
    alpha: f64,
    out_value: *mut f64,
) -> KherdStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        *slot = alpha_mmd_sq(&deref(ctx, "context")?.0, slice_in(indices, m, "indices")?, alpha)?;
        Ok(())
    })
}

/// Classical MMD² (α = 1).
///
/// # Safety
/// Same contract as [`kherd_alpha_mmd_sq`].
#[no_mangle]
pub unsafe extern "C" fn kherd_mmd_sq(
    ctx: *const KherdContext,
    indices: *const usize,
    m: usize,
    out_value: *mut f64,
) -> KherdStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        *slot = mmd_sq(&deref(ctx, "context")?.0, slice_in(indices, m, "indices")?)?;
        Ok(())
    })
}
