//! 8 kHz / 16-bit mono PCM: WAV reading and writing, super-frame alignment.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

/// The only sample rate the pipeline accepts.
pub const SAMPLE_RATE_HZ: u32 = 8000;

const WAVE_FORMAT_PCM: u16 = 1;

#[derive(Debug, Error)]
pub enum WavError {
    #[error("not a RIFF/WAVE file: {0}")]
    NotWav(&'static str),
    #[error("unsupported WAV format: {0}")]
    UnsupportedFormat(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Mono speech at 8 kHz, 16-bit signed samples.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PcmSignal {
    samples: Vec<i16>,
}

impl PcmSignal {
    pub fn new(samples: Vec<i16>) -> Self {
        Self { samples }
    }

    pub fn samples(&self) -> &[i16] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<i16> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate_hz(&self) -> u32 {
        SAMPLE_RATE_HZ
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / f64::from(SAMPLE_RATE_HZ)
    }
}

impl From<Vec<i16>> for PcmSignal {
    fn from(samples: Vec<i16>) -> Self {
        Self::new(samples)
    }
}

/// Parses an in-memory RIFF/WAVE image. Unknown chunks are skipped.
pub fn parse_wav(bytes: &[u8]) -> Result<PcmSignal, WavError> {
    if bytes.len() < 12 {
        return Err(WavError::NotWav("file shorter than RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(WavError::NotWav("missing RIFF magic"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(WavError::NotWav("missing WAVE form type"));
    }

    let mut fmt_seen = false;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&end| end <= bytes.len())
            .ok_or(WavError::NotWav("chunk runs past end of file"))?;
        let body = &bytes[body_start..body_end];

        match id {
            b"fmt " => {
                check_fmt(body)?;
                fmt_seen = true;
            }
            b"data" => {
                if !fmt_seen {
                    return Err(WavError::NotWav("data chunk before fmt chunk"));
                }
                if !size.is_multiple_of(2) {
                    return Err(WavError::NotWav("odd-sized 16-bit data chunk"));
                }
                let samples = body
                    .chunks_exact(2)
                    .map(|b| i16::from_le_bytes([b[0], b[1]]))
                    .collect();
                return Ok(PcmSignal::new(samples));
            }
            _ => {}
        }
        // chunks are word aligned
        pos = body_end + (size & 1);
    }
    Err(WavError::NotWav("no data chunk"))
}

fn check_fmt(body: &[u8]) -> Result<(), WavError> {
    if body.len() < 16 {
        return Err(WavError::NotWav("fmt chunk too short"));
    }
    let u16_at = |i: usize| u16::from_le_bytes([body[i], body[i + 1]]);
    let format = u16_at(0);
    let channels = u16_at(2);
    let rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
    let bits = u16_at(14);

    if format != WAVE_FORMAT_PCM {
        return Err(WavError::UnsupportedFormat(format!(
            "format code {format}, expected 1 (PCM)"
        )));
    }
    if channels != 1 {
        return Err(WavError::UnsupportedFormat(format!(
            "{channels} channels, expected mono"
        )));
    }
    if rate != SAMPLE_RATE_HZ {
        return Err(WavError::UnsupportedFormat(format!(
            "{rate} Hz, expected {SAMPLE_RATE_HZ} Hz"
        )));
    }
    if bits != 16 {
        return Err(WavError::UnsupportedFormat(format!(
            "{bits}-bit samples, expected 16-bit"
        )));
    }
    Ok(())
}

/// Serializes with the canonical 44-byte header.
pub fn encode_wav(signal: &PcmSignal) -> Vec<u8> {
    let data_len = (signal.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&WAVE_FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&SAMPLE_RATE_HZ.to_le_bytes());
    out.extend_from_slice(&(SAMPLE_RATE_HZ * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in signal.samples() {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<PcmSignal, WavError> {
    parse_wav(&fs::read(path)?)
}

pub fn write_wav(signal: &PcmSignal, path: impl AsRef<Path>) -> Result<(), WavError> {
    fs::write(path, encode_wav(signal))?;
    Ok(())
}

/// Zero-pads `signal` to a whole number of super-frames
/// (`sub_frame_len * frames_per_super` samples) and returns the padded
/// signal together with the original length.
///
/// Panics if either size is zero.
pub fn pad_to_superframe(
    signal: &PcmSignal,
    sub_frame_len: usize,
    frames_per_super: usize,
) -> (PcmSignal, usize) {
    assert!(sub_frame_len > 0 && frames_per_super > 0);
    let unit = sub_frame_len * frames_per_super;
    let original_length = signal.len();
    let padded_len = original_length.div_ceil(unit) * unit;
    let mut samples = signal.samples().to_vec();
    samples.resize(padded_len, 0);
    (PcmSignal::new(samples), original_length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wav_with_fmt(format: u16, channels: u16, rate: u32, bits: u16, data: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data.len() as u32).to_le_bytes());
        out.extend_from_slice(b"WAVEfmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&format.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&rate.to_le_bytes());
        let block = channels * bits / 8;
        out.extend_from_slice(&(rate * u32::from(block)).to_le_bytes());
        out.extend_from_slice(&block.to_le_bytes());
        out.extend_from_slice(&bits.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(data);
        out
    }

    #[test]
    fn decodes_three_samples() {
        let data: Vec<u8> = [0i16, 100, -100].iter().flat_map(|s| s.to_le_bytes()).collect();
        let sig = parse_wav(&wav_with_fmt(1, 1, 8000, 16, &data)).unwrap();
        assert_eq!(sig.samples(), &[0, 100, -100]);
    }

    #[test]
    fn rejects_cd_quality_stereo() {
        let err = parse_wav(&wav_with_fmt(1, 2, 44100, 16, &[0; 8])).unwrap_err();
        assert!(matches!(err, WavError::UnsupportedFormat(_)));
    }

    #[test]
    fn rejects_non_pcm_and_wrong_width() {
        assert!(matches!(
            parse_wav(&wav_with_fmt(3, 1, 8000, 16, &[])),
            Err(WavError::UnsupportedFormat(_))
        ));
        assert!(matches!(
            parse_wav(&wav_with_fmt(1, 1, 8000, 8, &[])),
            Err(WavError::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(parse_wav(b"hello"), Err(WavError::NotWav(_))));
        assert!(matches!(parse_wav(b"RIFF\0\0\0\0AVI LIST"), Err(WavError::NotWav(_))));
        let mut truncated = encode_wav(&PcmSignal::new(vec![1, 2, 3]));
        truncated.truncate(truncated.len() - 1);
        assert!(matches!(parse_wav(&truncated), Err(WavError::NotWav(_))));
    }

    #[test]
    fn skips_unknown_chunks() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"RIFF\0\0\0\0WAVE");
        bytes.extend_from_slice(b"LIST");
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(b"abc\0"); // odd chunk + pad byte
        let canonical = encode_wav(&PcmSignal::new(vec![7, -7]));
        bytes.extend_from_slice(&canonical[12..]);
        assert_eq!(parse_wav(&bytes).unwrap().samples(), &[7, -7]);
    }

    #[test]
    fn empty_signal_header_only() {
        let bytes = encode_wav(&PcmSignal::default());
        assert_eq!(bytes.len(), 44);
        assert_eq!(&bytes[40..44], &0u32.to_le_bytes());
        assert!(parse_wav(&bytes).unwrap().is_empty());
    }

    #[test]
    fn one_second_file_size() {
        let bytes = encode_wav(&PcmSignal::new(vec![0; 8000]));
        assert_eq!(bytes.len(), 44 + 16000);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        let sig = PcmSignal::new(vec![i16::MIN, -1, 0, 1, i16::MAX]);
        write_wav(&sig, &path).unwrap();
        assert_eq!(read_wav(&path).unwrap(), sig);
        assert!(matches!(
            read_wav(dir.path().join("missing.wav")),
            Err(WavError::Io(_))
        ));
    }

    #[test]
    fn padding_cases() {
        let (p, n) = pad_to_superframe(&PcmSignal::new(vec![1; 2560]), 160, 16);
        assert_eq!((p.len(), n), (2560, 2560));
        let (p, n) = pad_to_superframe(&PcmSignal::new(vec![1; 2561]), 160, 16);
        assert_eq!((p.len(), n), (5120, 2561));
        assert!(p.samples()[2561..].iter().all(|&s| s == 0));
        let (p, n) = pad_to_superframe(&PcmSignal::default(), 160, 16);
        assert_eq!((p.len(), n), (0, 0));
    }

    proptest! {
        #[test]
        fn wav_round_trip(samples in proptest::collection::vec(any::<i16>(), 0..2000)) {
            let sig = PcmSignal::new(samples);
            prop_assert_eq!(parse_wav(&encode_wav(&sig)).unwrap(), sig);
        }

        #[test]
        fn padding_aligns_and_preserves_prefix(
            samples in proptest::collection::vec(any::<i16>(), 0..3000),
            l in 1usize..400,
            n in 1usize..20,
        ) {
            let sig = PcmSignal::new(samples);
            let (padded, orig) = pad_to_superframe(&sig, l, n);
            prop_assert_eq!(padded.len() % (l * n), 0);
            prop_assert_eq!(orig, sig.len());
            prop_assert_eq!(&padded.samples()[..orig], sig.samples());
        }
    }
}
