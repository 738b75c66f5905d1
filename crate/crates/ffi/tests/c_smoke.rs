//! Compiles a small C program against the generated header and the static
//! library, then runs it.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "gsmcrypt.h"

int main(void) {
    uint8_t key[GSMCRYPT_KEY_BYTES] = {1, 2, 3, 4, 5, 6, 7, 8};
    int16_t pcm[4000];
    for (int i = 0; i < 4000; i++) pcm[i] = (int16_t)((i * 37) % 2000 - 1000);

    GsmcryptSession *s = NULL;
    if (gsmcrypt_session_new(key, 160, 16, GSMCRYPT_INVERSION_TIME, &s) != GSMCRYPT_STATUS_OK) return 1;
    GsmcryptBuffer stream = {0};
    if (gsmcrypt_encrypt(s, pcm, 4000, &stream) != GSMCRYPT_STATUS_OK) return 2;
    GsmcryptSamples back = {0};
    if (gsmcrypt_decrypt(s, stream.data, stream.len, &back) != GSMCRYPT_STATUS_OK) return 3;
    if (back.len != 4000) return 4;

    key[0] ^= 0x80;
    GsmcryptSession *w = NULL;
    gsmcrypt_session_new(key, 160, 16, GSMCRYPT_INVERSION_TIME, &w);
    GsmcryptSamples junk = {0};
    GsmcryptStatus st = gsmcrypt_decrypt(w, stream.data, stream.len, &junk);
    if (st != GSMCRYPT_STATUS_DECRYPTION_FAILED) return 5;

    printf("%s %zu %s\n", gsmcrypt_version(), stream.len, gsmcrypt_status_message(st));
    gsmcrypt_samples_free(back);
    gsmcrypt_buffer_free(stream);
    gsmcrypt_session_free(w);
    gsmcrypt_session_free(s);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/c_smoke-<hash> -> target/<profile>
    let lib_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let staticlib = lib_dir.join("libgsmcrypt_ffi.a");
    assert!(staticlib.exists(), "{} missing", staticlib.display());

    let work = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("c_smoke");
    std::fs::create_dir_all(&work).unwrap();
    let src = work.join("smoke.c");
    let exe = work.join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&src)
        .arg(&staticlib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(env!("CARGO_PKG_VERSION")), "{text}");
    assert!(text.contains("decryption failed"), "{text}");
}

fn which_cc() -> Result<String, ()> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    match Command::new(&cc).arg("--version").output() {
        Ok(o) if o.status.success() => Ok(cc),
        _ => Err(()),
    }
}
