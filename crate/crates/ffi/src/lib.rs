//! C interface to the looming detector.
//!
//! A pipeline is an opaque handle created by [`looming_pipeline_new`] or
//! [`looming_pipeline_from_config`] and released with
//! [`looming_pipeline_free`]. Frames are passed as row-major 8-bit gray
//! buffers of exactly `width * height` bytes. Every fallible call returns a
//! [`LoomingStatus`]; on failure [`looming_last_error`] describes the cause.
//!
//! A handle must not be used from two threads at once. Distinct handles are
//! independent.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use looming::{
    default_params, Error, Field, ModelParams, Pipeline, PipelineOptions, TargetEstimate,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoomingStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    InvalidParams = 4,
    DimensionMismatch = 5,
    AlreadyPrimed = 6,
    NotPrimed = 7,
    BufferTooSmall = 8,
    Internal = 9,
}

/// Scalar outputs of one processed frame.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LoomingFrameReport {
    pub t: u64,
    pub u: f64,
    pub out: f64,
    pub spike: u64,
    pub collision: bool,
    pub n_targets: usize,
}

/// One clustered target of the latest frame.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LoomingTarget {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub energy: f64,
    pub n_points: usize,
}

/// Opaque pipeline handle.
pub struct LoomingPipeline {
    pipeline: Pipeline,
    targets: Vec<TargetEstimate>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> LoomingStatus {
    match e {
        Error::Parse { .. } => LoomingStatus::ParseError,
        Error::Invalid(_) | Error::InvalidKernel(_) | Error::MissingOrientation(_) => {
            LoomingStatus::InvalidParams
        }
        Error::DimensionMismatch { .. } => LoomingStatus::DimensionMismatch,
        Error::AlreadyPrimed => LoomingStatus::AlreadyPrimed,
        Error::NotPrimed => LoomingStatus::NotPrimed,
        Error::NonFinite(_) | Error::Empty(_) => LoomingStatus::InvalidArgument,
        _ => LoomingStatus::Internal,
    }
}

struct Fail(LoomingStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LoomingStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LoomingStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LoomingStatus::Internal
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(LoomingStatus::NullPointer, format!("{what} is null"))
}

unsafe fn handle_mut<'a>(h: *mut LoomingPipeline) -> Result<&'a mut LoomingPipeline, Fail> {
    h.as_mut().ok_or_else(|| null("pipeline"))
}

unsafe fn frame_from(h: &LoomingPipeline, gray: *const u8, len: usize) -> Result<Field, Fail> {
    if gray.is_null() {
        return Err(null("frame"));
    }
    let p = h.pipeline.params();
    let (w, ht) = (p.frame_width, p.frame_height);
    if len != w * ht {
        return Err(Fail(
            LoomingStatus::DimensionMismatch,
            format!("frame holds {len} bytes, expected {w}x{ht} = {}", w * ht),
        ));
    }
    let bytes = std::slice::from_raw_parts(gray, len);
    let data = bytes.iter().map(|&b| f64::from(b) / 255.0).collect();
    Ok(Field::from_vec(w, ht, data)?)
}

fn create(
    params: ModelParams,
    gate_targets: bool,
    out: *mut *mut LoomingPipeline,
) -> Result<(), Fail> {
    let options = PipelineOptions {
        gate_targets,
        ..PipelineOptions::default()
    };
    let pipeline = Pipeline::new(params, options)?;
    let boxed = Box::new(LoomingPipeline {
        pipeline,
        targets: Vec::new(),
    });
    // SAFETY: `out` was checked non-null by the callers.
    unsafe { *out = Box::into_raw(boxed) };
    Ok(())
}

/// Creates a pipeline with default parameters for `width` x `height` frames.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn looming_pipeline_new(
    width: usize,
    height: usize,
    gate_targets: bool,
    out: *mut *mut LoomingPipeline,
) -> LoomingStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let mut p = default_params();
        p.frame_width = width;
        p.frame_height = height;
        create(p, gate_targets, out)
    })
}

/// Creates a pipeline from a `key = value` parameter document. Keys it omits
/// keep their defaults.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` a valid pointer to
/// writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn looming_pipeline_from_config(
    config: *const c_char,
    gate_targets: bool,
    out: *mut *mut LoomingPipeline,
) -> LoomingStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if config.is_null() {
            return Err(null("config"));
        }
        let text = CStr::from_ptr(config).to_str().map_err(|_| {
            Fail(
                LoomingStatus::InvalidArgument,
                "config is not valid UTF-8".into(),
            )
        })?;
        create(ModelParams::load(text)?, gate_targets, out)
    })
}

/// Records the first frame. No report is produced.
///
/// # Safety
/// `pipeline` must be a live handle and `gray` must point to `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn looming_pipeline_prime(
    pipeline: *mut LoomingPipeline,
    gray: *const u8,
    len: usize,
) -> LoomingStatus {
    guard(|| {
        let h = handle_mut(pipeline)?;
        let frame = frame_from(h, gray, len)?;
        h.pipeline.prime(&frame)?;
        Ok(())
    })
}

/// Processes one frame and fills `report`. The frame's targets stay
/// available through [`looming_pipeline_targets`] until the next step.
///
/// # Safety
/// `pipeline` must be a live handle, `gray` must point to `len` bytes and
/// `report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn looming_pipeline_step(
    pipeline: *mut LoomingPipeline,
    gray: *const u8,
    len: usize,
    report: *mut LoomingFrameReport,
) -> LoomingStatus {
    guard(|| {
        let h = handle_mut(pipeline)?;
        if report.is_null() {
            return Err(null("report"));
        }
        let frame = frame_from(h, gray, len)?;
        let r = h.pipeline.step(&frame)?;
        *report = LoomingFrameReport {
            t: r.t,
            u: r.u,
            out: r.out,
            spike: r.spike,
            collision: r.collision,
            n_targets: r.targets.len(),
        };
        h.targets = r.targets;
        Ok(())
    })
}

/// Copies the latest frame's targets into `buf`. `written` receives the
/// number of targets; when it exceeds `capacity` nothing is copied and
/// `BufferTooSmall` is returned. `buf` may be null when `capacity` is 0.
///
/// # Safety
/// `pipeline` must be a live handle, `buf` must hold `capacity` entries and
/// `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn looming_pipeline_targets(
    pipeline: *const LoomingPipeline,
    buf: *mut LoomingTarget,
    capacity: usize,
    written: *mut usize,
) -> LoomingStatus {
    guard(|| {
        let h = pipeline.as_ref().ok_or_else(|| null("pipeline"))?;
        if written.is_null() {
            return Err(null("written"));
        }
        let n = h.targets.len();
        *written = n;
        if n > capacity {
            return Err(Fail(
                LoomingStatus::BufferTooSmall,
                format!("{n} targets do not fit in {capacity}"),
            ));
        }
        if n > 0 && buf.is_null() {
            return Err(null("buf"));
        }
        for (i, t) in h.targets.iter().enumerate() {
            *buf.add(i) = LoomingTarget {
                x: t.x,
                y: t.y,
                phi: t.phi,
                energy: t.energy,
                n_points: t.member_count,
            };
        }
        Ok(())
    })
}

/// Number of frames consumed so far, 0 for a null handle.
///
/// # Safety
/// `pipeline` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn looming_pipeline_frame_index(pipeline: *const LoomingPipeline) -> u64 {
    pipeline.as_ref().map_or(0, |h| h.pipeline.frame_index())
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `pipeline` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn looming_pipeline_free(pipeline: *mut LoomingPipeline) {
    if !pipeline.is_null() {
        drop(Box::from_raw(pipeline));
    }
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn looming_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn looming_status_name(status: LoomingStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        LoomingStatus::Ok => b"ok\0",
        LoomingStatus::NullPointer => b"null pointer\0",
        LoomingStatus::InvalidArgument => b"invalid argument\0",
        LoomingStatus::ParseError => b"parse error\0",
        LoomingStatus::InvalidParams => b"invalid parameters\0",
        LoomingStatus::DimensionMismatch => b"dimension mismatch\0",
        LoomingStatus::AlreadyPrimed => b"already primed\0",
        LoomingStatus::NotPrimed => b"not primed\0",
        LoomingStatus::BufferTooSmall => b"buffer too small\0",
        LoomingStatus::Internal => b"internal error\0",
    };
    s.as_ptr().cast()
}
