//! C interface to the head pose model.
//!
//! Every fallible function returns an [`HpStatus`]. On failure a message is
//! stored per thread and can be read with [`hp_last_error`]. Models are opaque
//! [`HpModel`] handles created by `hp_model_new` or `hp_model_load` and
//! released with `hp_model_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use headpose::dataset_io::{project_to_pixel, AngleNormalizer};
use headpose::depth_prep::{preprocess, CameraIntrinsics, DepthMap, NetInput, PrepConfig, NET_PIXELS};
use headpose::error::Error;
use headpose::posenet::{build_model, Checkpoint, PoseNet};

/// Number of values in a network input (64 x 64).
pub const HP_INPUT_LEN: usize = 4096;
const _: () = assert!(HP_INPUT_LEN == NET_PIXELS);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Io = 3,
    Checkpoint = 4,
    Preprocess = 5,
    Model = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HpIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

/// Opaque model handle.
pub struct HpModel {
    model: PoseNet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(HpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Prep(_) | Error::Dataset(_) => HpStatus::Preprocess,
            Error::Checkpoint(headpose::error::CheckpointError::Io(_)) | Error::Io(_) => HpStatus::Io,
            Error::Checkpoint(_) => HpStatus::Checkpoint,
            _ => HpStatus::Model,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(HpStatus::NullArgument, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HpStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HpStatus::Panic
        }
    }
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a str, Failure> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map_err(|_| Failure(HpStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

unsafe fn net_input(input: *const f64) -> Result<NetInput, Failure> {
    if input.is_null() {
        return Err(null("input"));
    }
    let data = std::slice::from_raw_parts(input, HP_INPUT_LEN).to_vec();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Failure(HpStatus::InvalidArgument, "input contains non-finite values".into()));
    }
    Ok(NetInput::new(data, vec![true; HP_INPUT_LEN]).expect("length checked"))
}

unsafe fn depth_input(
    depth_mm: *const u16,
    width: usize,
    height: usize,
    intrinsics: *const HpIntrinsics,
    center_mm: *const f64,
) -> Result<NetInput, Failure> {
    if depth_mm.is_null() {
        return Err(null("depth_mm"));
    }
    if intrinsics.is_null() {
        return Err(null("intrinsics"));
    }
    if center_mm.is_null() {
        return Err(null("center_mm"));
    }
    let len = width
        .checked_mul(height)
        .ok_or_else(|| Failure(HpStatus::InvalidArgument, "width * height overflows".into()))?;
    let depth = DepthMap::from_millimeters(width, height, std::slice::from_raw_parts(depth_mm, len))
        .map_err(|e| Failure::from(Error::from(e)))?;
    let k = &*intrinsics;
    let k = CameraIntrinsics::new(k.fx, k.fy, k.cx, k.cy).map_err(|e| Failure::from(Error::from(e)))?;
    let c = std::slice::from_raw_parts(center_mm, 3);
    let center = [c[0], c[1], c[2]];
    let px = project_to_pixel(center, &k).map_err(|e| Failure::from(Error::from(e)))?;
    preprocess(&depth, &k, px, center[2], &PrepConfig::default()).map_err(|e| Failure::from(Error::from(e)))
}

fn predict_into(model: &HpModel, input: &NetInput, out_deg: *mut f64) -> Result<(), Failure> {
    if out_deg.is_null() {
        return Err(null("out_deg"));
    }
    let e = model.model.predict(input).map_err(|e| Failure::from(Error::from(e)))?;
    // SAFETY: caller provides room for three doubles.
    unsafe { std::slice::from_raw_parts_mut(out_deg, 3) }.copy_from_slice(&e.to_array());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Values expected by `hp_model_predict` and written by `hp_preprocess`.
#[no_mangle]
pub extern "C" fn hp_input_len() -> usize {
    HP_INPUT_LEN
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Creates an untrained model with seeded weights and the default angle scales.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn hp_model_new(seed: u64, out: *mut *mut HpModel) -> HpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mut model = build_model(seed);
        model.normalizer = Some(AngleNormalizer::default());
        *out = Box::into_raw(Box::new(HpModel { model }));
        Ok(())
    })
}

/// Loads a checkpoint file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn hp_model_load(path: *const c_char, out: *mut *mut HpModel) -> HpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = path_arg(path)?;
        let ck = Checkpoint::load(path).map_err(|e| Failure::from(Error::from(e)))?;
        if ck.model.normalizer.is_none() {
            return Err(Failure(HpStatus::Checkpoint, "checkpoint has no angle scales".into()));
        }
        *out = Box::into_raw(Box::new(HpModel { model: ck.model }));
        Ok(())
    })
}

/// Writes the model to a checkpoint file.
///
/// # Safety
/// `model` must come from this library and `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hp_model_save(model: *const HpModel, path: *const c_char) -> HpStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let path = path_arg(path)?;
        Checkpoint {
            model: model.model.clone(),
            epoch: 0,
            seed: 0,
        }
        .save(path)
        .map_err(|e| Failure::from(Error::from(e)))
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hp_model_free(model: *mut HpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Predicts (pitch, roll, yaw) in degrees from a preprocessed 64x64 input.
///
/// # Safety
/// `input` must hold `hp_input_len()` doubles and `out_deg` room for three.
#[no_mangle]
pub unsafe extern "C" fn hp_model_predict(model: *const HpModel, input: *const f64, out_deg: *mut f64) -> HpStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let input = net_input(input)?;
        predict_into(model, &input, out_deg)
    })
}

/// Crops, segments, resizes, normalizes and stretches a depth frame around
/// the head center. Zero depth marks missing pixels.
///
/// # Safety
/// `depth_mm` must hold `width * height` values, `center_mm` three doubles
/// and `out` room for `hp_input_len()` doubles.
#[no_mangle]
pub unsafe extern "C" fn hp_preprocess(
    depth_mm: *const u16,
    width: usize,
    height: usize,
    intrinsics: *const HpIntrinsics,
    center_mm: *const f64,
    out: *mut f64,
) -> HpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let input = depth_input(depth_mm, width, height, intrinsics, center_mm)?;
        std::slice::from_raw_parts_mut(out, HP_INPUT_LEN).copy_from_slice(&input.data);
        Ok(())
    })
}

/// `hp_preprocess` followed by `hp_model_predict`.
///
/// # Safety
/// Same requirements as `hp_preprocess`, plus a valid `model` and room for
/// three doubles at `out_deg`.
#[no_mangle]
pub unsafe extern "C" fn hp_model_predict_depth(
    model: *const HpModel,
    depth_mm: *const u16,
    width: usize,
    height: usize,
    intrinsics: *const HpIntrinsics,
    center_mm: *const f64,
    out_deg: *mut f64,
) -> HpStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let input = depth_input(depth_mm, width, height, intrinsics, center_mm)?;
        predict_into(model, &input, out_deg)
    })
}
