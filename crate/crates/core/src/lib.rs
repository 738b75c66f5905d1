//! End-to-end speech scrambling for a GSM full-rate voice channel.
//!
//! Speech is cut into sub-frames, rearranged and inverted under a keyed
//! permutation, and then fed to an unmodified RPE-LTP vocoder. The
//! permutation table for each super-frame is DES-CBC encrypted and carried
//! in-band next to the packed codec frames, so the receiver can decode the
//! speech and undo the scrambling.
//!
//! Modules, bottom up:
//! - [`speech_io`]: 8 kHz 16-bit mono WAV I/O and super-frame padding
//! - [`des`]: DES, CBC mode, and the counter keystream
//! - [`scrambler`]: permutation tables, scrambling and their wire layout
//! - [`codec`]: the fixed-point RPE-LTP encoder/decoder and 33-byte frames
//! - [`stream`]: the secure stream container and pipeline
//! - [`metrics`]: segmental SNR, cross-correlation, spectrograms, CSV export
//! - [`cli`]: the `gsmcrypt` command-line front end

pub mod cli;
pub mod codec;
pub mod des;
pub mod metrics;
pub mod scrambler;
pub mod speech_io;
pub mod stream;

pub use codec::{CodecFrame, Decoder, Encoder};
pub use des::DesKey;
pub use scrambler::{InversionMode, PermutationTable, ScrambleConfig};
pub use speech_io::PcmSignal;
