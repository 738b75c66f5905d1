//! End-to-end runs of the `gsmcrypt` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gsmcrypt::speech_io::read_wav;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn gsmcrypt(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsmcrypt"))
        .args(args.iter().map(|a| a.as_ref()))
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn keygen(dir: &Path, name: &str, seed: u64) -> PathBuf {
    let path = dir.join(name);
    let out = gsmcrypt(&[&"keygen", &"--out", &path, &"--seed", &seed.to_string()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn keygen_is_deterministic_with_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = std::fs::read(keygen(dir.path(), "a.key", 42)).unwrap();
    let b = std::fs::read(keygen(dir.path(), "b.key", 42)).unwrap();
    let c = std::fs::read(keygen(dir.path(), "c.key", 43)).unwrap();
    assert_eq!(a.len(), 8);
    assert_eq!(a, b);
    assert_ne!(a, c);
    let hex = std::fs::read_to_string(keygen(dir.path(), "a.hex", 42)).unwrap();
    let as_hex: String = a.iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(hex.trim(), as_hex);
}

#[test]
fn encrypt_decrypt_restores_length() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let key = keygen(d, "k.hex", 1);
    let gvs = d.join("speech.gvs");
    let wav = d.join("back.wav");
    let out = gsmcrypt(&[&"encrypt", &"--in", &data("speech.wav"), &"--key", &key, &"--out", &gvs]);
    assert_eq!(code(&out), 0);
    let out = gsmcrypt(&[&"decrypt", &"--in", &gvs, &"--key", &key, &"--out", &wav]);
    assert_eq!(code(&out), 0);
    assert_eq!(read_wav(&wav).unwrap().len(), read_wav(data("speech.wav")).unwrap().len());

    // eavesdrop keeps the super-frame padding
    let eaves = d.join("eaves.wav");
    assert_eq!(code(&gsmcrypt(&[&"eavesdrop", &"--in", &gvs, &"--out", &eaves])), 0);
    assert_eq!(read_wav(&eaves).unwrap().len() % 2560, 0);
}

#[test]
fn wrong_key_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let key = keygen(d, "k.key", 1);
    let wrong = keygen(d, "w.key", 2);
    let gvs = d.join("v.gvs");
    gsmcrypt(&[&"encrypt", &"--in", &data("vowel.wav"), &"--key", &key, &"--out", &gvs]);
    let out = gsmcrypt(&[&"decrypt", &"--in", &gvs, &"--key", &wrong, &"--out", &d.join("x.wav")]);
    assert_eq!(code(&out), 3);
    assert!(!out.stderr.is_empty());
}

#[test]
fn usage_and_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&gsmcrypt(&[&"frobnicate"])), 1);
    assert_eq!(code(&gsmcrypt(&[&"encrypt", &"--in", &"x.wav"])), 1);
    let key = keygen(d, "k.key", 1);
    let out = gsmcrypt(&[
        &"encrypt", &"--in", &data("vowel.wav"), &"--key", &key, &"--out", &d.join("o.gvs"),
        &"--sub-frame-len", &"100",
    ]);
    assert_eq!(code(&out), 1);

    let junk = d.join("junk.gvs");
    std::fs::write(&junk, b"not a stream at all, definitely").unwrap();
    assert_eq!(code(&gsmcrypt(&[&"decrypt", &"--in", &junk, &"--key", &key, &"--out", &d.join("o.wav")])), 2);
    assert_eq!(code(&gsmcrypt(&[&"eavesdrop", &"--in", &junk, &"--out", &d.join("o.wav")])), 2);
    assert_eq!(code(&gsmcrypt(&[&"codec-decode", &"--in", &junk, &"--out", &d.join("o.wav")])), 2);
    std::fs::write(d.join("short.key"), [1, 2, 3]).unwrap();
    let out = gsmcrypt(&[&"encrypt", &"--in", &data("vowel.wav"), &"--key", &d.join("short.key"), &"--out", &d.join("o.gvs")]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&gsmcrypt(&[&"codec-encode", &"--in", &key, &"--out", &d.join("o.gsm")])), 2);
}

#[test]
fn codec_commands_match_reference_frames() {
    let dir = tempfile::tempdir().unwrap();
    let gsm = dir.path().join("v.gsm");
    let wav = dir.path().join("v.wav");
    assert_eq!(code(&gsmcrypt(&[&"codec-encode", &"--in", &data("vowel.wav"), &"--out", &gsm])), 0);
    assert_eq!(std::fs::read(&gsm).unwrap(), std::fs::read(data("vowel.gsm")).unwrap());
    assert_eq!(code(&gsmcrypt(&[&"codec-decode", &"--in", &gsm, &"--out", &wav])), 0);
    assert_eq!(read_wav(&wav).unwrap().len(), 8000);
}

#[test]
fn analyze_prints_metrics_and_writes_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out = gsmcrypt(&[
        &"analyze", &"--reference", &data("vowel.wav"), &"--in", &data("vowel.wav"), &"--out", &dir.path(),
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("segmental SNR (dB): 35.000"), "{text}");
    assert!(text.contains("max normalized cross-correlation: 1.0000"), "{text}");
    for f in ["overlay.csv", "spectrogram_reference.csv", "spectrogram_input.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn simulate_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let key = keygen(dir.path(), "k.key", 5);
    let out_dir = dir.path().join("sim");
    let out = gsmcrypt(&[
        &"simulate", &"--in", &data("speech.wav"), &"--key", &key, &"--out", &out_dir, &"--ber", &"0.001",
        &"--seed", &"3",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<String> = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "eavesdropped.wav",
            "original.wav",
            "overlay.csv",
            "recovered.wav",
            "report.txt",
            "scrambled.wav",
            "spectrogram_eavesdropped.csv",
            "spectrogram_original.csv",
            "spectrogram_recovered.csv",
            "spectrogram_scrambled.csv",
        ]
    );
    let report = std::fs::read_to_string(out_dir.join("report.txt")).unwrap();
    for row in ["codec-only", "scrambled", "eavesdropped", "recovered", "RMS(original - recovered)"] {
        assert!(report.contains(row), "{row}");
    }
    let n = read_wav(data("speech.wav")).unwrap().len();
    for wav in ["original", "scrambled", "eavesdropped", "recovered"] {
        assert_eq!(read_wav(out_dir.join(format!("{wav}.wav"))).unwrap().len(), n, "{wav}");
    }
    // deterministic given its flags
    let again = dir.path().join("sim2");
    gsmcrypt(&[
        &"simulate", &"--in", &data("speech.wav"), &"--key", &key, &"--out", &again, &"--ber", &"0.001",
        &"--seed", &"3",
    ]);
    assert_eq!(
        std::fs::read(out_dir.join("recovered.wav")).unwrap(),
        std::fs::read(again.join("recovered.wav")).unwrap()
    );
}
