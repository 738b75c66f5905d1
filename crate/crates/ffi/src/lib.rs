//! C ABI over the `gsmcrypt` pipeline.
//!
//! Every function returns a [`GsmcryptStatus`]; results come back through
//! out-pointers. Handles are opaque and must be released with their
//! `_free` function. Buffers returned by the library are owned by the
//! caller and released with [`gsmcrypt_buffer_free`] or
//! [`gsmcrypt_samples_free`]. No function unwinds into C: a Rust panic is
//! reported as [`GsmcryptStatus::Panic`].

#![allow(clippy::missing_safety_doc)]

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use gsmcrypt::codec::{self, Decoder, Encoder, FRAME_LEN, PACKED_FRAME_LEN};
use gsmcrypt::stream::{self, StreamError};
use gsmcrypt::{DesKey, InversionMode, PcmSignal, ScrambleConfig};

/// Samples per codec frame.
pub const GSMCRYPT_FRAME_SAMPLES: usize = 160;
/// Bytes per packed codec frame.
pub const GSMCRYPT_FRAME_BYTES: usize = 33;
pub const GSMCRYPT_KEY_BYTES: usize = 8;

const _: () = assert!(GSMCRYPT_FRAME_SAMPLES == FRAME_LEN && GSMCRYPT_FRAME_BYTES == PACKED_FRAME_LEN);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsmcryptStatus {
    Ok = 0,
    /// A required pointer was null.
    NullPointer = 1,
    /// A numeric argument was out of range (e.g. sub-frame length).
    InvalidArgument = 2,
    /// Input bytes are not a well-formed stream or frame.
    BadFormat = 3,
    /// Wrong key or tampered stream.
    DecryptionFailed = 4,
    /// Internal error; the library caught a panic.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsmcryptInversion {
    Time = 0,
    Sign = 1,
}

impl From<GsmcryptInversion> for InversionMode {
    fn from(m: GsmcryptInversion) -> Self {
        match m {
            GsmcryptInversion::Time => Self::Time,
            GsmcryptInversion::Sign => Self::Sign,
        }
    }
}

/// Library-allocated bytes.
#[repr(C)]
pub struct GsmcryptBuffer {
    pub data: *mut u8,
    pub len: usize,
}

/// Library-allocated 16-bit samples.
#[repr(C)]
pub struct GsmcryptSamples {
    pub data: *mut i16,
    pub len: usize,
}

/// Key plus scrambler configuration.
pub struct GsmcryptSession {
    key: DesKey,
    config: ScrambleConfig,
}

/// Stateful codec encoder.
pub struct GsmcryptEncoder(Encoder);

/// Stateful codec decoder.
pub struct GsmcryptDecoder(Decoder);

fn guard(f: impl FnOnce() -> GsmcryptStatus) -> GsmcryptStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(GsmcryptStatus::Panic)
}

fn stream_status(e: &StreamError) -> GsmcryptStatus {
    match e {
        StreamError::DecryptionFailed { .. } => GsmcryptStatus::DecryptionFailed,
        StreamError::BadBitErrorRate(_) => GsmcryptStatus::InvalidArgument,
        _ => GsmcryptStatus::BadFormat,
    }
}

/// `len` elements at `data`; a null pointer is only accepted for `len == 0`.
unsafe fn input<'a, T>(data: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if data.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(data, len))
    }
}

fn into_buffer(v: Vec<u8>) -> GsmcryptBuffer {
    let mut v = v.into_boxed_slice();
    let out = GsmcryptBuffer { data: v.as_mut_ptr(), len: v.len() };
    std::mem::forget(v);
    out
}

fn into_samples(v: Vec<i16>) -> GsmcryptSamples {
    let mut v = v.into_boxed_slice();
    let out = GsmcryptSamples { data: v.as_mut_ptr(), len: v.len() };
    std::mem::forget(v);
    out
}

/// Static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn gsmcrypt_status_message(status: GsmcryptStatus) -> *const c_char {
    let msg: &'static CStr = match status {
        GsmcryptStatus::Ok => c"ok",
        GsmcryptStatus::NullPointer => c"null pointer argument",
        GsmcryptStatus::InvalidArgument => c"argument out of range",
        GsmcryptStatus::BadFormat => c"malformed stream or frame",
        GsmcryptStatus::DecryptionFailed => c"decryption failed (wrong key or tampered stream)",
        GsmcryptStatus::Panic => c"internal error",
    };
    msg.as_ptr()
}

#[no_mangle]
pub extern "C" fn gsmcrypt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a session from an 8-byte key. `sub_frame_len` must be a
/// positive multiple of 160, `frames_per_super` in 1..=256.
#[no_mangle]
pub unsafe extern "C" fn gsmcrypt_session_new(
    key: *const u8,
    sub_frame_len: u32,
    frames_per_super: u32,
    inversion: GsmcryptInversion,
    out: *mut *mut GsmcryptSession,
) -> GsmcryptStatus {
    guard(|| {
        if key.is_null() || out.is_null() {
            return GsmcryptStatus::NullPointer;
        }
        let key: [u8; GSMCRYPT_KEY_BYTES] = ptr::read(key.cast());
        let Ok(config) = ScrambleConfig::new(sub_frame_len as usize, frames_per_super as usize) else {
            return GsmcryptStatus::InvalidArgument;
        };
        let session = GsmcryptSession {
            key: DesKey::new(key),
            config: config.with_inversion(inversion.into()),
        };
        *out = Box::into_raw(Box::new(session));
        GsmcryptStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn gsmcrypt_session_free(session: *mut GsmcryptSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Scrambles, encodes and encrypts `len` samples into a secure stream.
#[no_mangle]
pub unsafe extern "C" fn gsmcrypt_encrypt(
    session: *const GsmcryptSession,
    samples: *const i16,
    len: usize,
    out: *mut GsmcryptBuffer,
) -> GsmcryptStatus {
    guard(|| {
        let (Some(session), Some(samples), false) = (session.as_ref(), input(samples, len), out.is_null())
        else {
            return GsmcryptStatus::NullPointer;
        };
        let signal = PcmSignal::new(samples.to_vec());
        *out = into_buffer(stream::encrypt_stream(&signal, &session.key, &session.config));
        GsmcryptStatus::Ok
    })
}

/// Recovers the original samples from a secure stream.
#[no_mangle]
pub unsafe extern "C" fn gsmcrypt_decrypt(
    session: *const GsmcryptSession,
    bytes: *const u8,
    len: usize,
    out: *mut GsmcryptSamples,
) -> GsmcryptStatus {
    guard(|| {
        let (Some(session), Some(bytes), false) = (session.as_ref(), input(bytes, len), out.is_null())
        else {
            return GsmcryptStatus::NullPointer;
        };
        match stream::decrypt_stream(bytes, &session.key, session.config.inversion()) {
            Ok(signal) => {
                *out = into_samples(signal.into_samples());
                GsmcryptStatus::Ok
            }
            Err(e) => stream_status(&e),
        }
    })
}

/// Decodes a secure stream without descrambling (no key needed).
#[no_mangle]
pub unsafe extern "C" fn gsmcrypt_eavesdrop(
    bytes: *const u8,
    len: usize,
    out: *mut GsmcryptSamples,
) -> GsmcryptStatus {
    guard(|| {
        let (Some(bytes), false) = (input(bytes, len), out.is_null()) else {
            return GsmcryptStatus::NullPointer;
        };
        match stream::eavesdrop_stream(bytes) {
            Ok(signal) => {
                *out = into_samples(signal.into_samples());
                GsmcryptStatus::Ok
            }
            Err(e) => stream_status(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn gsmcrypt_buffer_free(buffer: GsmcryptBuffer) {
    if !buffer.data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(buffer.data, buffer.len)));
    }
}

#[no_mangle]
pub unsafe extern "C" fn gsmcrypt_samples_free(samples: GsmcryptSamples) {
    if !samples.data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(samples.data, samples.len)));
    }
}

#[no_mangle]
pub unsafe extern "C" fn gsmcrypt_encoder_new(out: *mut *mut GsmcryptEncoder) -> GsmcryptStatus {
    guard(|| {
        if out.is_null() {
            return GsmcryptStatus::NullPointer;
        }
        *out = Box::into_raw(Box::new(GsmcryptEncoder(Encoder::new())));
        GsmcryptStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn gsmcrypt_encoder_free(encoder: *mut GsmcryptEncoder) {
    if !encoder.is_null() {
        drop(Box::from_raw(encoder));
    }
}

/// Encodes 160 samples into one 33-byte frame.
#[no_mangle]
pub unsafe extern "C" fn gsmcrypt_encode_frame(
    encoder: *mut GsmcryptEncoder,
    samples: *const i16,
    frame_out: *mut u8,
) -> GsmcryptStatus {
    guard(|| {
        let Some(encoder) = encoder.as_mut() else {
            return GsmcryptStatus::NullPointer;
        };
        if samples.is_null() || frame_out.is_null() {
            return GsmcryptStatus::NullPointer;
        }
        let pcm = slice::from_raw_parts(samples, FRAME_LEN);
        let frame = encoder.0.encode_frame(pcm).expect("160 samples");
        let packed = codec::pack_frame(&frame);
        ptr::copy_nonoverlapping(packed.as_ptr(), frame_out, PACKED_FRAME_LEN);
        GsmcryptStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn gsmcrypt_decoder_new(out: *mut *mut GsmcryptDecoder) -> GsmcryptStatus {
    guard(|| {
        if out.is_null() {
            return GsmcryptStatus::NullPointer;
        }
        *out = Box::into_raw(Box::new(GsmcryptDecoder(Decoder::new())));
        GsmcryptStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn gsmcrypt_decoder_free(decoder: *mut GsmcryptDecoder) {
    if !decoder.is_null() {
        drop(Box::from_raw(decoder));
    }
}

/// Decodes one 33-byte frame into 160 samples. A frame without the 0xd
/// signature nibble is rejected with `BadFormat` and leaves the decoder
/// state untouched.
#[no_mangle]
pub unsafe extern "C" fn gsmcrypt_decode_frame(
    decoder: *mut GsmcryptDecoder,
    frame: *const u8,
    samples_out: *mut i16,
) -> GsmcryptStatus {
    guard(|| {
        let Some(decoder) = decoder.as_mut() else {
            return GsmcryptStatus::NullPointer;
        };
        if frame.is_null() || samples_out.is_null() {
            return GsmcryptStatus::NullPointer;
        }
        let bytes = slice::from_raw_parts(frame, PACKED_FRAME_LEN);
        let Ok(parsed) = codec::unpack_frame(bytes) else {
            return GsmcryptStatus::BadFormat;
        };
        let Ok(pcm) = decoder.0.decode_frame(&parsed) else {
            return GsmcryptStatus::BadFormat;
        };
        ptr::copy_nonoverlapping(pcm.as_ptr(), samples_out, FRAME_LEN);
        GsmcryptStatus::Ok
    })
}
