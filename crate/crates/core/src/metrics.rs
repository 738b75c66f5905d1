//! Objective comparisons between an original and a processed signal, and
//! CSV exports for waveform overlays and spectrograms.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::speech_io::SAMPLE_RATE_HZ;

pub const SEGMENT_LEN: usize = 160;
pub const SNR_FLOOR_DB: f64 = -10.0;
pub const SNR_CEIL_DB: f64 = 35.0;
/// Reference segments quieter than this RMS are left out of the mean.
pub const ACTIVITY_RMS: f64 = 100.0;
pub const DEFAULT_WINDOW_LEN: usize = 256;
pub const DEFAULT_HOP_LEN: usize = 128;
/// Default lag search span for cross-correlation: one codec frame.
pub const DEFAULT_MAX_LAG: usize = 160;
pub const DB_EPSILON: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("signals differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("cross-correlation of a silent signal is undefined")]
    SilentInput,
    #[error("bad spectrogram window: {0}")]
    BadWindow(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentalSnrReport {
    /// Clamped SNR of every segment, active or not.
    pub per_segment_db: Vec<f64>,
    /// Mean over active segments; 0 when there are none.
    pub mean_db: f64,
    pub active_segments: usize,
    pub total_segments: usize,
}

/// Mean per-segment SNR over 160-sample segments, each clamped to
/// [-10, 35] dB. A trailing partial segment counts as a segment.
pub fn segmental_snr(reference: &[i16], test: &[i16]) -> Result<SegmentalSnrReport, MetricsError> {
    if reference.len() != test.len() {
        return Err(MetricsError::LengthMismatch(reference.len(), test.len()));
    }
    let mut per_segment_db = Vec::with_capacity(reference.len().div_ceil(SEGMENT_LEN));
    let mut active_sum = 0.0;
    let mut active_segments = 0;
    for (r, t) in reference.chunks(SEGMENT_LEN).zip(test.chunks(SEGMENT_LEN)) {
        let signal: f64 = r.iter().map(|&x| f64::from(x).powi(2)).sum();
        let noise: f64 = r
            .iter()
            .zip(t)
            .map(|(&x, &y)| (f64::from(x) - f64::from(y)).powi(2))
            .sum();
        let snr = if noise == 0.0 {
            SNR_CEIL_DB
        } else if signal == 0.0 {
            SNR_FLOOR_DB
        } else {
            (10.0 * (signal / noise).log10()).clamp(SNR_FLOOR_DB, SNR_CEIL_DB)
        };
        per_segment_db.push(snr);
        if (signal / r.len() as f64).sqrt() >= ACTIVITY_RMS {
            active_sum += snr;
            active_segments += 1;
        }
    }
    let mean_db = if active_segments == 0 {
        0.0
    } else {
        active_sum / active_segments as f64
    };
    Ok(SegmentalSnrReport {
        total_segments: per_segment_db.len(),
        per_segment_db,
        mean_db,
        active_segments,
    })
}

/// `max |sum_n a[n] b[n+lag]| / sqrt(sum a^2 * sum b^2)` over
/// `lag in -max_lag..=max_lag`, the numerator summed over the overlap.
pub fn max_normalized_cross_correlation(
    a: &[i16],
    b: &[i16],
    max_lag: usize,
) -> Result<f64, MetricsError> {
    let energy = |x: &[i16]| x.iter().map(|&v| f64::from(v).powi(2)).sum::<f64>();
    let norm = (energy(a) * energy(b)).sqrt();
    if norm == 0.0 {
        return Err(MetricsError::SilentInput);
    }
    let a: Vec<f64> = a.iter().map(|&v| f64::from(v)).collect();
    let b: Vec<f64> = b.iter().map(|&v| f64::from(v)).collect();

    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let mut best = 0.0f64;
    for lag in 0..=max_lag {
        // b shifted left by `lag`, then a shifted left by `lag`
        if lag < b.len() {
            best = best.max(dot(&a, &b[lag..]).abs());
        }
        if lag > 0 && lag < a.len() {
            best = best.max(dot(&a[lag..], &b).abs());
        }
    }
    Ok((best / norm).min(1.0))
}

/// In-place iterative radix-2 FFT. Panics unless the length is a power of two.
pub fn fft(buf: &mut [Complex64]) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "FFT length {n} is not a power of two");
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let step = Complex64::from_polar(1.0, -2.0 * PI / len as f64);
        for chunk in buf.chunks_exact_mut(len) {
            let mut w = Complex64::new(1.0, 0.0);
            let (lo, hi) = chunk.split_at_mut(len / 2);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let t = *y * w;
                *y = *x - t;
                *x += t;
                w *= step;
            }
        }
        len <<= 1;
    }
}

/// Periodic Hann window.
pub fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
        .collect()
}

/// Magnitudes of bins `0..=len/2` of the transform of `frame`.
pub fn frame_magnitudes(frame: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex64> = frame.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft(&mut buf);
    buf[..frame.len() / 2 + 1].iter().map(|c| c.norm()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    /// frames x bins, in dB relative to full scale.
    pub magnitudes_db: Vec<Vec<f64>>,
    pub window_len: usize,
    pub hop_len: usize,
}

impl Spectrogram {
    pub fn bins(&self) -> usize {
        self.window_len / 2 + 1
    }

    pub fn frames(&self) -> usize {
        self.magnitudes_db.len()
    }

    pub fn sample_rate_hz(&self) -> u32 {
        SAMPLE_RATE_HZ
    }

    pub fn bin_frequency_hz(&self, bin: usize) -> f64 {
        bin as f64 * f64::from(SAMPLE_RATE_HZ) / self.window_len as f64
    }
}

/// Hann-windowed short-time magnitude spectrum, `20 log10(|X| + 1e-10)`,
/// with samples scaled to [-1, 1). The tail is zero-padded so every sample
/// lands in some frame.
pub fn spectrogram(
    signal: &[i16],
    window_len: usize,
    hop_len: usize,
) -> Result<Spectrogram, MetricsError> {
    if window_len < 2 || !window_len.is_power_of_two() {
        return Err(MetricsError::BadWindow(format!(
            "window length {window_len} is not a power of two"
        )));
    }
    if hop_len == 0 || hop_len > window_len {
        return Err(MetricsError::BadWindow(format!(
            "hop {hop_len} outside 1..={window_len}"
        )));
    }

    let frames = if signal.is_empty() {
        0
    } else if signal.len() <= window_len {
        1
    } else {
        1 + (signal.len() - window_len).div_ceil(hop_len)
    };
    let window = hann(window_len);
    let mut magnitudes_db = Vec::with_capacity(frames);
    let mut frame = vec![0.0; window_len];
    for f in 0..frames {
        let start = f * hop_len;
        for (i, slot) in frame.iter_mut().enumerate() {
            let x = signal.get(start + i).map_or(0.0, |&s| f64::from(s) / 32768.0);
            *slot = x * window[i];
        }
        let row = frame_magnitudes(&frame)
            .into_iter()
            .map(|m| 20.0 * (m + DB_EPSILON).log10())
            .collect();
        magnitudes_db.push(row);
    }
    Ok(Spectrogram {
        magnitudes_db,
        window_len,
        hop_len,
    })
}

pub fn write_overlay_csv<W: Write>(
    out: W,
    original: &[i16],
    synthesized: &[i16],
) -> Result<(), MetricsError> {
    if original.len() != synthesized.len() {
        return Err(MetricsError::LengthMismatch(original.len(), synthesized.len()));
    }
    let mut out = BufWriter::new(out);
    out.write_all(b"index,original,synthesized\n")?;
    for (i, (a, b)) in original.iter().zip(synthesized).enumerate() {
        writeln!(out, "{i},{a},{b}")?;
    }
    out.flush()?;
    Ok(())
}

/// CSV with columns `index,original,synthesized`, one row per sample.
pub fn export_overlay_csv(
    original: &[i16],
    synthesized: &[i16],
    path: impl AsRef<Path>,
) -> Result<(), MetricsError> {
    if original.len() != synthesized.len() {
        return Err(MetricsError::LengthMismatch(original.len(), synthesized.len()));
    }
    write_overlay_csv(File::create(path)?, original, synthesized)
}

/// Header row of bin centre frequencies (Hz), then one row per frame.
pub fn write_spectrogram_csv<W: Write>(out: W, spec: &Spectrogram) -> Result<(), MetricsError> {
    let mut out = BufWriter::new(out);
    let header: Vec<String> = (0..spec.bins())
        .map(|b| format!("{:.2}", spec.bin_frequency_hz(b)))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for row in &spec.magnitudes_db {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.2}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn export_spectrogram_csv(spec: &Spectrogram, path: impl AsRef<Path>) -> Result<(), MetricsError> {
    write_spectrogram_csv(File::create(path)?, spec)
}

/// Root-mean-square of the sample-wise difference.
pub fn rms_difference(a: &[i16], b: &[i16]) -> Result<f64, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (f64::from(x) - f64::from(y)).powi(2))
        .sum();
    Ok((sum / a.len() as f64).sqrt())
}
