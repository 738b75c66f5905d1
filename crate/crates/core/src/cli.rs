//! The `gsmcrypt` command line.
//!
//! Exit status: 0 success, 1 usage error, 2 data or format error,
//! 3 decryption failed (wrong key or tampered stream).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{self, Decoder, Encoder, FRAME_LEN, PACKED_FRAME_LEN};
use crate::des::DesKey;
use crate::metrics::{self, DEFAULT_HOP_LEN, DEFAULT_MAX_LAG, DEFAULT_WINDOW_LEN};
use crate::scrambler::{InversionMode, ScrambleConfig};
use crate::speech_io::{self, PcmSignal};
use crate::stream::{self, StreamError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_DECRYPT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gsmcrypt", version, about = "Speech scrambling ahead of a GSM full-rate vocoder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a new 8-byte DES key (`.hex` extension: hex text, else raw).
    Keygen {
        #[arg(long)]
        out: PathBuf,
        /// Derive the key deterministically from this seed instead of OS entropy.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// WAV to secure stream.
    Encrypt {
        #[command(flatten)]
        io: InOut,
        #[arg(long)]
        key: PathBuf,
        #[command(flatten)]
        scramble: ScrambleArgs,
    },
    /// Secure stream to WAV.
    Decrypt {
        #[command(flatten)]
        io: InOut,
        #[arg(long)]
        key: PathBuf,
        #[arg(long, default_value = "time")]
        inversion_mode: InversionMode,
    },
    /// Decode a secure stream without the key (no descrambling).
    Eavesdrop {
        #[command(flatten)]
        io: InOut,
    },
    /// WAV to raw 33-byte codec frames (no encryption).
    CodecEncode {
        #[command(flatten)]
        io: InOut,
    },
    /// Raw 33-byte codec frames to WAV.
    CodecDecode {
        #[command(flatten)]
        io: InOut,
    },
    /// Compare a signal against a reference; optionally write CSVs.
    Analyze {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        /// Directory for overlay.csv and the two spectrogram CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the whole chain and write every intermediate signal.
    Simulate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        key: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        scramble: ScrambleArgs,
        /// Codec payload bit error rate applied to the stream.
        #[arg(long, default_value_t = 0.0)]
        ber: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct InOut {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ScrambleArgs {
    #[arg(long, default_value_t = 160)]
    sub_frame_len: usize,
    #[arg(long, default_value_t = 16)]
    frames_per_super: usize,
    #[arg(long, default_value = "time")]
    inversion_mode: InversionMode,
}

impl ScrambleArgs {
    fn config(&self) -> Result<ScrambleConfig, CliError> {
        ScrambleConfig::new(self.sub_frame_len, self.frames_per_super)
            .map(|c| c.with_inversion(self.inversion_mode))
            .map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Decrypt(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Data(_) => EXIT_DATA,
            Self::Decrypt(_) => EXIT_DECRYPT,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Data(m) | Self::Decrypt(m) => m,
        }
    }
}

impl From<StreamError> for CliError {
    fn from(e: StreamError) -> Self {
        match e {
            StreamError::DecryptionFailed { .. } => Self::Decrypt(e.to_string()),
            StreamError::BadBitErrorRate(_) => Self::Usage(e.to_string()),
            _ => Self::Data(e.to_string()),
        }
    }
}

fn data_err(context: &Path) -> impl Fn(&dyn std::fmt::Display) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", context.display()))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| data_err(path)(&e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| data_err(path)(&e))
}

fn read_wav(path: &Path) -> Result<PcmSignal, CliError> {
    speech_io::read_wav(path).map_err(|e| data_err(path)(&e))
}

fn write_wav(signal: &PcmSignal, path: &Path) -> Result<(), CliError> {
    speech_io::write_wav(signal, path).map_err(|e| data_err(path)(&e))
}

fn is_hex_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("hex"))
}

/// `.hex` files hold 16 hex digits; anything else holds 8 raw bytes.
fn read_key(path: &Path) -> Result<DesKey, CliError> {
    let bytes = read_bytes(path)?;
    let key = if is_hex_path(path) {
        std::str::from_utf8(&bytes).ok().and_then(DesKey::from_hex)
    } else {
        <[u8; 8]>::try_from(bytes.as_slice()).ok().map(DesKey::new)
    };
    key.ok_or_else(|| CliError::Data(format!("{}: not a DES key", path.display())))
}

fn write_key(key: &DesKey, path: &Path) -> Result<(), CliError> {
    if is_hex_path(path) {
        write_bytes(path, format!("{}\n", key.to_hex()).as_bytes())
    } else {
        write_bytes(path, key.as_bytes())
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| data_err(dir)(&e))
}

fn metrics_err(path: &Path) -> impl Fn(metrics::MetricsError) -> CliError + '_ {
    move |e| data_err(path)(&e)
}

fn export_spectrogram(signal: &[i16], path: &Path) -> Result<(), CliError> {
    let spec = metrics::spectrogram(signal, DEFAULT_WINDOW_LEN, DEFAULT_HOP_LEN).map_err(metrics_err(path))?;
    metrics::export_spectrogram_csv(&spec, path).map_err(metrics_err(path))
}

/// Cross-correlation, or NaN when either side is silent.
fn xcorr(a: &[i16], b: &[i16]) -> f64 {
    metrics::max_normalized_cross_correlation(a, b, DEFAULT_MAX_LAG).unwrap_or(f64::NAN)
}

fn seg_snr(reference: &[i16], test: &[i16]) -> f64 {
    metrics::segmental_snr(reference, test).map_or(f64::NAN, |r| r.mean_db)
}

fn keygen(out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let mut bytes = [0u8; 8];
    match seed {
        Some(seed) => ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut bytes),
        None => rand::rngs::OsRng.fill_bytes(&mut bytes),
    }
    write_key(&DesKey::new(bytes), out)
}

fn codec_encode(io: &InOut) -> Result<(), CliError> {
    let signal = read_wav(&io.input)?;
    let mut samples = signal.into_samples();
    samples.resize(samples.len().div_ceil(FRAME_LEN) * FRAME_LEN, 0);
    let frames = Encoder::new().encode(&samples).expect("whole frames");
    let bytes: Vec<u8> = frames.iter().flat_map(codec::pack_frame).collect();
    write_bytes(&io.out, &bytes)
}

fn codec_decode(io: &InOut) -> Result<(), CliError> {
    let bytes = read_bytes(&io.input)?;
    if bytes.len() % PACKED_FRAME_LEN != 0 {
        return Err(CliError::Data(format!(
            "{}: {} bytes is not a whole number of {PACKED_FRAME_LEN}-byte frames",
            io.input.display(),
            bytes.len()
        )));
    }
    let mut decoder = Decoder::new();
    let mut out = Vec::with_capacity(bytes.len() / PACKED_FRAME_LEN * FRAME_LEN);
    for (i, packed) in bytes.chunks_exact(PACKED_FRAME_LEN).enumerate() {
        let frame = codec::unpack_frame(packed)
            .map_err(|e| CliError::Data(format!("{}: frame {i}: {e}", io.input.display())))?;
        out.extend_from_slice(&decoder.decode_frame(&frame).expect("unpacked frames are valid"));
    }
    write_wav(&PcmSignal::new(out), &io.out)
}

fn analyze(reference: &Path, input: &Path, out: Option<&Path>) -> Result<String, CliError> {
    let a = read_wav(reference)?;
    let b = read_wav(input)?;
    let n = a.len().min(b.len());
    let (a, b) = (&a.samples()[..n], &b.samples()[..n]);
    let mut report = String::new();
    writeln!(report, "samples compared: {n}").unwrap();
    writeln!(report, "segmental SNR (dB): {:.3}", seg_snr(a, b)).unwrap();
    writeln!(report, "max normalized cross-correlation: {:.4}", xcorr(a, b)).unwrap();
    writeln!(report, "RMS difference: {:.3}", metrics::rms_difference(a, b).unwrap()).unwrap();
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let overlay = dir.join("overlay.csv");
        metrics::export_overlay_csv(a, b, &overlay).map_err(metrics_err(&overlay))?;
        export_spectrogram(a, &dir.join("spectrogram_reference.csv"))?;
        export_spectrogram(b, &dir.join("spectrogram_input.csv"))?;
    }
    Ok(report)
}

fn simulate(
    input: &Path,
    key: &Path,
    out: &Path,
    config: &ScrambleConfig,
    ber: f64,
    seed: u64,
) -> Result<String, CliError> {
    if !(0.0..=1.0).contains(&ber) {
        return Err(CliError::Usage(format!("--ber {ber} outside [0, 1]")));
    }
    let original = read_wav(input)?;
    let key = read_key(key)?;
    ensure_dir(out)?;
    let n = original.len();

    let mut scrambled = stream::scrambled_signal(&original, &key, config).into_samples();
    scrambled.truncate(n);
    let mut wire = stream::encrypt_stream(&original, &key, config);
    let wire_len = wire.len();
    if ber > 0.0 {
        wire = stream::inject_bit_errors(&wire, ber, seed)?;
    }
    let mut eavesdropped = stream::eavesdrop_stream(&wire)?.into_samples();
    eavesdropped.truncate(n);
    let recovered = stream::decrypt_stream(&wire, &key, config.inversion())?.into_samples();
    let codec_only = codec::round_trip(original.samples());

    let signals: [(&str, &[i16]); 4] = [
        ("original", original.samples()),
        ("scrambled", &scrambled),
        ("eavesdropped", &eavesdropped),
        ("recovered", &recovered),
    ];
    for (name, samples) in signals {
        write_wav(&PcmSignal::new(samples.to_vec()), &out.join(format!("{name}.wav")))?;
        export_spectrogram(samples, &out.join(format!("spectrogram_{name}.csv")))?;
    }
    let overlay = out.join("overlay.csv");
    metrics::export_overlay_csv(original.samples(), &recovered, &overlay).map_err(metrics_err(&overlay))?;

    let x = original.samples();
    let mut report = String::new();
    let w = &mut report;
    writeln!(w, "input: {} ({n} samples, {:.3} s)", input.display(), original.duration_secs()).unwrap();
    writeln!(
        w,
        "scrambler: sub-frame {} samples, {} sub-frames per super-frame, {} inversion",
        config.sub_frame_len(),
        config.frames_per_super(),
        config.inversion()
    )
    .unwrap();
    writeln!(w, "stream: {wire_len} bytes, bit error rate {ber} (seed {seed})").unwrap();
    writeln!(w).unwrap();
    writeln!(w, "signal        segSNR_dB  xcorr_vs_original").unwrap();
    let rows: [(&str, &[i16]); 4] = [
        ("codec-only", &codec_only),
        ("scrambled", &scrambled),
        ("eavesdropped", &eavesdropped),
        ("recovered", &recovered),
    ];
    for (name, samples) in rows {
        writeln!(w, "{name:<13} {:>9.3}  {:>17.4}", seg_snr(x, samples), xcorr(x, samples)).unwrap();
    }
    writeln!(w).unwrap();
    writeln!(
        w,
        "RMS(original - recovered): {:.3}",
        metrics::rms_difference(x, &recovered).unwrap()
    )
    .unwrap();
    writeln!(w, "overlay: overlay.csv (original vs recovered)").unwrap();
    writeln!(w, "signals: original.wav scrambled.wav eavesdropped.wav recovered.wav").unwrap();
    fs::write(out.join("report.txt"), &report).map_err(|e| data_err(out)(&e))?;
    Ok(report)
}

fn execute(cli: Cli) -> Result<Option<String>, CliError> {
    match cli.command {
        Command::Keygen { out, seed } => keygen(&out, seed)?,
        Command::Encrypt { io, key, scramble } => {
            let config = scramble.config()?;
            let key = read_key(&key)?;
            let signal = read_wav(&io.input)?;
            write_bytes(&io.out, &stream::encrypt_stream(&signal, &key, &config))?;
        }
        Command::Decrypt { io, key, inversion_mode } => {
            let key = read_key(&key)?;
            let bytes = read_bytes(&io.input)?;
            write_wav(&stream::decrypt_stream(&bytes, &key, inversion_mode)?, &io.out)?;
        }
        Command::Eavesdrop { io } => {
            let bytes = read_bytes(&io.input)?;
            write_wav(&stream::eavesdrop_stream(&bytes)?, &io.out)?;
        }
        Command::CodecEncode { io } => codec_encode(&io)?,
        Command::CodecDecode { io } => codec_decode(&io)?,
        Command::Analyze { reference, input, out } => {
            return analyze(&reference, &input, out.as_deref()).map(Some);
        }
        Command::Simulate { input, key, out, scramble, ber, seed } => {
            let config = scramble.config()?;
            return simulate(&input, &key, &out, &config, ber, seed).map(Some);
        }
    }
    Ok(None)
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(report) => {
            if let Some(report) = report {
                print!("{report}");
                let _ = std::io::stdout().flush();
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("gsmcrypt: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
