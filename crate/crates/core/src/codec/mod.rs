//! GSM full-rate (RPE-LTP) speech codec in the standard's 16/32-bit
//! fixed-point arithmetic.
//!
//! Each 160-sample frame (20 ms at 8 kHz) codes to 76 parameters totalling
//! 260 bits, stored as 33 bytes behind a `0xD` signature nibble.

mod arith;
mod filters;
mod lpc;
mod ltp;
mod rpe;

use thiserror::Error;

pub use lpc::LAR_BITS;
pub use ltp::{MAX_LAG, MIN_LAG};

use filters::PreprocessState;
use lpc::Segment;

pub const FRAME_LEN: usize = 160;
pub const SUBFRAME_LEN: usize = 40;
pub const PACKED_FRAME_LEN: usize = 33;
pub const PAYLOAD_BITS: usize = 260;
const MAGIC: u8 = 0xD;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("expected {expected} samples/bytes, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("frame signature nibble {0:#x}, expected 0xd")]
    BadMagic(u8),
    #[error("frame field `{field}` out of range: {value}")]
    InvalidFrame { field: &'static str, value: u8 },
}

/// Parameters of one 40-sample sub-frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SubFrameParams {
    /// 7-bit LTP lag; the encoder emits 40..=120.
    pub ltp_lag: u8,
    /// 2-bit LTP gain code.
    pub ltp_gain: u8,
    /// 2-bit RPE grid phase.
    pub grid_position: u8,
    /// 6-bit APCM block maximum.
    pub block_max: u8,
    /// 3-bit pulse codes.
    pub rpe_pulses: [u8; 13],
}

/// The 76 quantized parameters of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CodecFrame {
    pub lar_codes: [u8; 8],
    pub sub_frames: [SubFrameParams; 4],
}

impl CodecFrame {
    /// The frame the encoder emits for digital silence on a fresh state.
    /// Note that the all-zero-code frame is *not* silent: code 0 is the most
    /// negative pulse level and the most extreme LAR.
    pub const fn silence() -> Self {
        let sub = SubFrameParams {
            ltp_lag: MIN_LAG as u8,
            ltp_gain: 0,
            grid_position: 0,
            block_max: 0,
            rpe_pulses: [4; 13],
        };
        Self {
            lar_codes: [32, 32, 20, 11, 8, 5, 3, 2],
            sub_frames: [sub; 4],
        }
    }

    /// Checks every field against its bit width.
    pub fn validate(&self) -> Result<(), CodecError> {
        let check = |field: &'static str, value: u8, bits: u32| {
            if u32::from(value) >> bits == 0 {
                Ok(())
            } else {
                Err(CodecError::InvalidFrame { field, value })
            }
        };
        for (&code, &bits) in self.lar_codes.iter().zip(&LAR_BITS) {
            check("lar_codes", code, bits)?;
        }
        for sub in &self.sub_frames {
            check("ltp_lag", sub.ltp_lag, 7)?;
            check("ltp_gain", sub.ltp_gain, 2)?;
            check("grid_position", sub.grid_position, 2)?;
            check("block_max", sub.block_max, 6)?;
            for &p in &sub.rpe_pulses {
                check("rpe_pulses", p, 3)?;
            }
        }
        Ok(())
    }

    /// Every field with its bit width, in transmission order.
    fn fields(&self) -> impl Iterator<Item = (u8, u32)> + '_ {
        let lars = self.lar_codes.iter().copied().zip(LAR_BITS);
        let subs = self.sub_frames.iter().flat_map(|s| {
            [(s.ltp_lag, 7), (s.ltp_gain, 2), (s.grid_position, 2), (s.block_max, 6)]
                .into_iter()
                .chain(s.rpe_pulses.iter().map(|&p| (p, 3)))
        });
        lars.chain(subs)
    }
}

struct BitWriter {
    bytes: [u8; PACKED_FRAME_LEN],
    bit: usize,
}

impl BitWriter {
    fn put(&mut self, value: u8, width: u32) {
        for i in (0..width).rev() {
            if value >> i & 1 == 1 {
                self.bytes[self.bit / 8] |= 0x80 >> (self.bit % 8);
            }
            self.bit += 1;
        }
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    bit: usize,
}

impl BitReader<'_> {
    fn get(&mut self, width: u32) -> u8 {
        let mut v = 0u8;
        for _ in 0..width {
            let b = self.bytes[self.bit / 8] >> (7 - self.bit % 8) & 1;
            v = (v << 1) | b;
            self.bit += 1;
        }
        v
    }
}

/// Packs a frame: `0xD` nibble, then the 260 parameter bits MSB first.
///
/// Fields wider than their bit width are masked; call
/// [`CodecFrame::validate`] first if that matters.
pub fn pack_frame(frame: &CodecFrame) -> [u8; PACKED_FRAME_LEN] {
    let mut w = BitWriter {
        bytes: [0; PACKED_FRAME_LEN],
        bit: 0,
    };
    w.put(MAGIC, 4);
    for (value, width) in frame.fields() {
        w.put(value & ((1u16 << width) - 1) as u8, width);
    }
    debug_assert_eq!(w.bit, 4 + PAYLOAD_BITS);
    w.bytes
}

pub fn unpack_frame(bytes: &[u8]) -> Result<CodecFrame, CodecError> {
    if bytes.len() != PACKED_FRAME_LEN {
        return Err(CodecError::LengthMismatch {
            expected: PACKED_FRAME_LEN,
            got: bytes.len(),
        });
    }
    let mut r = BitReader { bytes, bit: 0 };
    let magic = r.get(4);
    if magic != MAGIC {
        return Err(CodecError::BadMagic(magic));
    }
    let mut frame = CodecFrame::default();
    for (code, &width) in frame.lar_codes.iter_mut().zip(&LAR_BITS) {
        *code = r.get(width);
    }
    for sub in frame.sub_frames.iter_mut() {
        sub.ltp_lag = r.get(7);
        sub.ltp_gain = r.get(2);
        sub.grid_position = r.get(2);
        sub.block_max = r.get(6);
        for p in sub.rpe_pulses.iter_mut() {
            *p = r.get(3);
        }
    }
    Ok(frame)
}

fn as_frame(samples: &[i16]) -> Result<&[i16; FRAME_LEN], CodecError> {
    samples.try_into().map_err(|_| CodecError::LengthMismatch {
        expected: FRAME_LEN,
        got: samples.len(),
    })
}

/// LPC analysis of a preprocessed frame to the eight LAR codes.
pub fn lpc_analysis(frame: &[i16]) -> Result<[u8; 8], CodecError> {
    let mut s = *as_frame(frame)?;
    Ok(lpc::analyse(&mut s))
}

/// Reflection coefficients (Q15) recovered from LAR codes, as the
/// synthesis filter uses them in the steady part of a frame.
pub fn dequantized_reflection_coefficients(lar_codes: &[u8; 8]) -> [i16; 8] {
    lpc::lar_to_reflection(&lpc::decode_lars(lar_codes))
}

/// Streaming encoder. State carries across frames.
#[derive(Clone, Debug)]
pub struct Encoder {
    pre: PreprocessState,
    u: [i16; 8],
    larpp: [[i16; 8]; 2],
    j: usize,
    /// 120 samples of reconstructed residual history + the current frame.
    dp: [i16; 280],
}

impl Default for Encoder {
    fn default() -> Self {
        Self::new()
    }
}

impl Encoder {
    pub fn new() -> Self {
        Self {
            pre: PreprocessState::default(),
            u: [0; 8],
            larpp: [[0; 8]; 2],
            j: 0,
            dp: [0; 280],
        }
    }

    pub fn reset(&mut self) {
        *self = Self::new();
    }

    /// Offset compensation and pre-emphasis; advances only that stage's state.
    pub fn preprocess(&mut self, frame: &[i16]) -> Result<[i16; FRAME_LEN], CodecError> {
        Ok(self.pre.run(as_frame(frame)?))
    }

    pub fn encode_frame(&mut self, frame: &[i16]) -> Result<CodecFrame, CodecError> {
        let mut s = self.pre.run(as_frame(frame)?);
        let lar_codes = lpc::analyse(&mut s);

        // short-term analysis with interpolated coefficients; s becomes d
        let cur = self.j;
        self.j ^= 1;
        let prev = self.j;
        self.larpp[cur] = lpc::decode_lars(&lar_codes);
        for (seg, range) in Segment::ALL {
            let larp = lpc::interpolate(&self.larpp[prev], &self.larpp[cur], seg);
            let rp = lpc::lar_to_reflection(&larp);
            filters::short_term_analysis(&mut self.u, &rp, &mut s[range]);
        }

        let mut sub_frames = [SubFrameParams::default(); 4];
        for (k, params) in sub_frames.iter_mut().enumerate() {
            let d = &s[k * SUBFRAME_LEN..(k + 1) * SUBFRAME_LEN];
            let at = 120 + k * SUBFRAME_LEN;
            let (lag, gain) = ltp::parameters(d, &self.dp, at);
            let mut e = [0i16; SUBFRAME_LEN];
            ltp::analysis_filter(gain, lag, &mut self.dp, at, d, &mut e);
            let (code, ep) = rpe::encode(&e);
            // reconstructed residual = excitation + pitch estimate
            for (i, &x) in ep.iter().enumerate() {
                self.dp[at + i] = arith::add(x, self.dp[at + i]);
            }
            *params = SubFrameParams {
                ltp_lag: lag as u8,
                ltp_gain: gain,
                grid_position: code.grid,
                block_max: code.xmaxc,
                rpe_pulses: code.pulses,
            };
        }
        self.dp.copy_within(160..280, 0);

        Ok(CodecFrame {
            lar_codes,
            sub_frames,
        })
    }

    /// Encodes a whole number of frames.
    pub fn encode(&mut self, samples: &[i16]) -> Result<Vec<CodecFrame>, CodecError> {
        if !samples.len().is_multiple_of(FRAME_LEN) {
            return Err(CodecError::LengthMismatch {
                expected: samples.len().div_ceil(FRAME_LEN) * FRAME_LEN,
                got: samples.len(),
            });
        }
        samples.chunks_exact(FRAME_LEN).map(|f| self.encode_frame(f)).collect()
    }
}

/// Streaming decoder. State carries across frames.
#[derive(Clone, Debug)]
pub struct Decoder {
    drp: [i16; 160],
    nrp: i16,
    v: [i16; 9],
    larpp: [[i16; 8]; 2],
    j: usize,
    msr: i16,
}

impl Default for Decoder {
    fn default() -> Self {
        Self::new()
    }
}

impl Decoder {
    pub fn new() -> Self {
        Self {
            drp: [0; 160],
            nrp: MIN_LAG,
            v: [0; 9],
            larpp: [[0; 8]; 2],
            j: 0,
            msr: 0,
        }
    }

    pub fn reset(&mut self) {
        *self = Self::new();
    }

    pub fn decode_frame(&mut self, frame: &CodecFrame) -> Result<[i16; FRAME_LEN], CodecError> {
        frame.validate()?;

        let mut wt = [0i16; FRAME_LEN];
        for (k, sub) in frame.sub_frames.iter().enumerate() {
            let erp = rpe::decode(&rpe::RpeCode {
                grid: sub.grid_position,
                xmaxc: sub.block_max,
                pulses: sub.rpe_pulses,
            });
            ltp::synthesis_filter(&mut self.nrp, sub.ltp_lag, sub.ltp_gain, &erp, &mut self.drp);
            wt[k * SUBFRAME_LEN..(k + 1) * SUBFRAME_LEN].copy_from_slice(&self.drp[120..160]);
        }

        let cur = self.j;
        self.j ^= 1;
        let prev = self.j;
        self.larpp[cur] = lpc::decode_lars(&frame.lar_codes);
        let mut out = [0i16; FRAME_LEN];
        for (seg, range) in Segment::ALL {
            let larp = lpc::interpolate(&self.larpp[prev], &self.larpp[cur], seg);
            let rrp = lpc::lar_to_reflection(&larp);
            filters::short_term_synthesis(&mut self.v, &rrp, &wt[range.clone()], &mut out[range]);
        }
        filters::postprocess(&mut self.msr, &mut out);
        Ok(out)
    }

    pub fn decode(&mut self, frames: &[CodecFrame]) -> Result<Vec<i16>, CodecError> {
        let mut out = Vec::with_capacity(frames.len() * FRAME_LEN);
        for f in frames {
            out.extend_from_slice(&self.decode_frame(f)?);
        }
        Ok(out)
    }
}

/// Encodes and decodes `samples` on fresh states, zero-padding to whole
/// frames and trimming the output back to the input length.
pub fn round_trip(samples: &[i16]) -> Vec<i16> {
    let mut padded = samples.to_vec();
    padded.resize(samples.len().div_ceil(FRAME_LEN) * FRAME_LEN, 0);
    let frames = Encoder::new().encode(&padded).expect("whole frames");
    let mut out = Decoder::new().decode(&frames).expect("encoder output is valid");
    out.truncate(samples.len());
    out
}
