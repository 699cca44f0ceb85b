//! C ABI over the qdart engine.
//!
//! Objects cross the boundary as opaque handles created by `*_load`,
//! `*_stub` or `qdart_render` and released with the matching `*_free`.
//! Every fallible call returns a [`QdartStatus`]; on failure the message is
//! available from [`qdart_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{CStr, CString, c_char};
use std::panic::{AssertUnwindSafe, catch_unwind};
use std::path::PathBuf;
use std::ptr;

use qdart::app;
use qdart::drawgen::{Genome, render};
use qdart::embedding::{CorpusEmbedding, EncoderWeights, INPUT_SIZE, LATENT_DIM};
use qdart::metrics::fitness_at;
use qdart::qd::RunConfig;
use qdart::{Error, ErrorKind, Raster};

/// Status codes; the error values match the `qdart` CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdartStatus {
    Ok = 0,
    ConfigError = 2,
    IoError = 3,
    ValidationError = 4,
    NullPointer = 5,
    Panic = 6,
}

/// Grayscale image.
pub struct QdartRaster(Raster);

/// Encoder weights.
pub struct QdartWeights(EncoderWeights);

/// Fitted corpus embedding.
pub struct QdartEmbedding(CorpusEmbedding);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Engine(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

type FfiResult = Result<(), Failure>;

/// Run `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> FfiResult) -> QdartStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QdartStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            QdartStatus::NullPointer
        }
        Ok(Err(Failure::Engine(e))) => {
            set_error(e.to_string());
            match e.kind() {
                ErrorKind::Config => QdartStatus::ConfigError,
                ErrorKind::Io => QdartStatus::IoError,
                ErrorKind::Validation => QdartStatus::ValidationError,
            }
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(format!("panic: {msg}"));
            QdartStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

unsafe fn path_arg(p: *const c_char, what: &'static str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    let s = unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Error::Validation(format!("{what} is not valid UTF-8")))?;
    Ok(PathBuf::from(s))
}

unsafe fn put<T>(out: *mut *mut T, value: T, what: &'static str) -> FfiResult {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

unsafe fn genes_arg(genes: *const f64, len: usize) -> Result<Genome, Failure> {
    if genes.is_null() {
        return Err(Failure::Null("genes"));
    }
    Ok(Genome::from_slice(unsafe { std::slice::from_raw_parts(genes, len) })?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qdart_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qdart_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Render `genes_len` genes (must be 14) to a `canvas` x `canvas` drawing.
///
/// # Safety
/// `genes` must point to `genes_len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdart_render(
    genes: *const f64,
    genes_len: usize,
    canvas: usize,
    seed: u64,
    out: *mut *mut QdartRaster,
) -> QdartStatus {
    guard(|| {
        let g = unsafe { genes_arg(genes, genes_len)? };
        let img = render(&g, canvas, seed)?;
        unsafe { put(out, QdartRaster(img), "out") }
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdart_raster_read_png(path: *const c_char, out: *mut *mut QdartRaster) -> QdartStatus {
    guard(|| {
        let p = unsafe { path_arg(path, "path")? };
        let img = Raster::read_png(p)?;
        unsafe { put(out, QdartRaster(img), "out") }
    })
}

/// # Safety
/// `raster` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn qdart_raster_write_png(raster: *const QdartRaster, path: *const c_char) -> QdartStatus {
    guard(|| {
        let r = unsafe { as_ref(raster, "raster")? };
        let p = unsafe { path_arg(path, "path")? };
        Ok(r.0.write_png(p)?)
    })
}

/// Width in pixels, 0 for NULL.
///
/// # Safety
/// `raster` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qdart_raster_width(raster: *const QdartRaster) -> usize {
    unsafe { raster.as_ref() }.map_or(0, |r| r.0.width())
}

/// Height in pixels, 0 for NULL.
///
/// # Safety
/// `raster` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qdart_raster_height(raster: *const QdartRaster) -> usize {
    unsafe { raster.as_ref() }.map_or(0, |r| r.0.height())
}

/// Row-major 8-bit pixels (0 = ink, 255 = white), width * height bytes,
/// owned by the handle.
///
/// # Safety
/// `raster` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qdart_raster_pixels(raster: *const QdartRaster) -> *const u8 {
    unsafe { raster.as_ref() }.map_or(ptr::null(), |r| r.0.pixels().as_ptr())
}

/// # Safety
/// `raster` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qdart_raster_free(raster: *mut QdartRaster) {
    if !raster.is_null() {
        drop(unsafe { Box::from_raw(raster) });
    }
}

/// Structural-complexity fitness after resampling to `resolution`.
///
/// # Safety
/// `raster` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdart_fitness(raster: *const QdartRaster, resolution: usize, out: *mut f64) -> QdartStatus {
    guard(|| {
        let r = unsafe { as_ref(raster, "raster")? };
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let f = fitness_at(&r.0, resolution)?;
        unsafe { *out = f.value() };
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdart_weights_load(path: *const c_char, out: *mut *mut QdartWeights) -> QdartStatus {
    guard(|| {
        let p = unsafe { path_arg(path, "path")? };
        let w = app::load_weights(&p)?;
        unsafe { put(out, QdartWeights(w), "out") }
    })
}

/// Fixed random weights drawn from `seed`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdart_weights_stub(seed: u64, out: *mut *mut QdartWeights) -> QdartStatus {
    guard(|| unsafe { put(out, QdartWeights(EncoderWeights::stub(seed)), "out") })
}

/// # Safety
/// `weights` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn qdart_weights_save(weights: *const QdartWeights, path: *const c_char) -> QdartStatus {
    guard(|| {
        let w = unsafe { as_ref(weights, "weights")? };
        let p = unsafe { path_arg(path, "path")? };
        Ok(w.0.to_tensors().write(p)?)
    })
}

/// # Safety
/// `weights` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qdart_weights_free(weights: *mut QdartWeights) {
    if !weights.is_null() {
        drop(unsafe { Box::from_raw(weights) });
    }
}

/// Latent vector length written by [`qdart_encode`].
#[no_mangle]
pub extern "C" fn qdart_latent_dim() -> usize {
    LATENT_DIM
}

/// Encode a drawing (downsampled to 64x64) into `out`, which must hold
/// `out_len == qdart_latent_dim()` floats.
///
/// # Safety
/// Handles must be live; `out` must point to `out_len` writable floats.
#[no_mangle]
pub unsafe extern "C" fn qdart_encode(
    weights: *const QdartWeights,
    raster: *const QdartRaster,
    out: *mut f32,
    out_len: usize,
) -> QdartStatus {
    guard(|| {
        let w = unsafe { as_ref(weights, "weights")? };
        let r = unsafe { as_ref(raster, "raster")? };
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        if out_len != LATENT_DIM {
            return Err(Error::Validation(format!("output length {out_len}, expected {LATENT_DIM}")).into());
        }
        let z = w.0.encode(&r.0.resample_area(INPUT_SIZE, INPUT_SIZE)?)?;
        unsafe { std::slice::from_raw_parts_mut(out, out_len) }.copy_from_slice(&z);
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdart_embedding_load(path: *const c_char, out: *mut *mut QdartEmbedding) -> QdartStatus {
    guard(|| {
        let p = unsafe { path_arg(path, "path")? };
        let e = app::load_embedding(&p)?;
        unsafe { put(out, QdartEmbedding(e), "out") }
    })
}

/// Corpus size, 0 for NULL.
///
/// # Safety
/// `embedding` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qdart_embedding_len(embedding: *const QdartEmbedding) -> usize {
    unsafe { embedding.as_ref() }.map_or(0, |e| e.0.len())
}

/// # Safety
/// `embedding` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qdart_embedding_free(embedding: *mut QdartEmbedding) {
    if !embedding.is_null() {
        drop(unsafe { Box::from_raw(embedding) });
    }
}

/// Place a drawing on the unit-square map by interpolating its
/// `neighbours` nearest corpus entries; writes x, y to `out_pos[0..2]`.
///
/// # Safety
/// Handles must be live; `out_pos` must point to 2 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qdart_embed(
    weights: *const QdartWeights,
    embedding: *const QdartEmbedding,
    raster: *const QdartRaster,
    neighbours: usize,
    out_pos: *mut f64,
) -> QdartStatus {
    guard(|| {
        let w = unsafe { as_ref(weights, "weights")? };
        let e = unsafe { as_ref(embedding, "embedding")? };
        let r = unsafe { as_ref(raster, "raster")? };
        if out_pos.is_null() {
            return Err(Failure::Null("out_pos"));
        }
        let z = w.0.encode(&r.0.resample_area(INPUT_SIZE, INPUT_SIZE)?)?;
        let pos = e.0.embed_new(&z, neighbours)?;
        unsafe { std::slice::from_raw_parts_mut(out_pos, 2) }.copy_from_slice(&pos);
        Ok(())
    })
}

/// Load a configuration file and execute the run into `out_dir`.
///
/// # Safety
/// Both arguments must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn qdart_run_config(config_path: *const c_char, out_dir: *const c_char) -> QdartStatus {
    guard(|| {
        let cfg = RunConfig::load(unsafe { path_arg(config_path, "config_path")? })?;
        let out = unsafe { path_arg(out_dir, "out_dir")? };
        app::cmd_run(&cfg, &out)?;
        Ok(())
    })
}
