#!/usr/bin/env python3
"""Regenerate the bundled 8 kHz / 16-bit mono test signals.

    python3 scripts/make_test_signals.py crates/core/tests/data

vowel.wav   1.0 s sustained /a/: harmonic series at 120 Hz shaped by a
            three-formant envelope.
speech.wav  ~2.5 s formant-synthesized utterance: voiced syllables with a
            falling pitch contour and moving formants, fricative bursts
            about 18 dB below the vowels, short pauses and a low noise
            floor.

Both files are deterministic (fixed RNG seed).
"""

import sys
import wave
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

FS = 8000


def resonator(x, freq, bw, zi=None):
    r = np.exp(-np.pi * bw / FS)
    theta = 2 * np.pi * freq / FS
    a = [1.0, -2 * r * np.cos(theta), r * r]
    b = [1.0 - r]
    if zi is None:
        return lfilter(b, a, x)
    return lfilter(b, a, x, zi=zi)


def vowel():
    n = FS
    t = np.arange(n) / FS
    f0 = 120.0
    formants = [(700, 110), (1220, 120), (2600, 160)]

    def envelope(f):
        g = 0.0
        for fc, bw in formants:
            g += 1.0 / (1.0 + ((f - fc) / (bw / 2)) ** 2)
        return g / (1.0 + f / 1500.0)

    x = np.zeros(n)
    k = 1
    while k * f0 < 3800:
        x += envelope(k * f0) * np.sin(2 * np.pi * k * f0 * t + 0.3 * k * k)
        k += 1
    return x


def glottal_train(n, f0_start, f0_end, rng):
    """Impulse train with jitter, smoothed into a crude glottal pulse."""
    f0 = np.linspace(f0_start, f0_end, n)
    f0 = f0 * (1 + 0.01 * rng.standard_normal(n))
    phase = np.cumsum(f0 / FS)
    pulses = np.zeros(n)
    idx = np.nonzero(np.diff(np.floor(phase)) > 0)[0] + 1
    pulses[idx] = 1.0
    pulse = np.hanning(24)
    return np.convolve(pulses, np.diff(pulse, prepend=0.0), mode="same")


VOWELS = {
    "a": [(730, 90), (1090, 110), (2440, 170)],
    "i": [(270, 60), (2290, 100), (3010, 180)],
    "u": [(300, 60), (870, 90), (2240, 160)],
    "e": [(530, 70), (1840, 100), (2480, 160)],
    "o": [(570, 80), (840, 90), (2410, 160)],
}


def rms_normalize(y, level):
    return y / np.sqrt(np.mean(y ** 2)) * level


def voiced(dur, v_from, v_to, f0a, f0b, rng, level=1.0):
    n = int(dur * FS)
    src = glottal_train(n, f0a, f0b, rng)
    block = 80
    fa, fb = VOWELS[v_from], VOWELS[v_to]
    # formants move linearly across the syllable; filter in short blocks,
    # carrying each resonator's state across block edges
    y = np.zeros(n)
    states = [np.zeros(2) for _ in fa]
    for start in range(0, n, block):
        frac = start / max(n - 1, 1)
        seg = src[start:start + block]
        acc = np.zeros_like(seg)
        for k, ((f1, b1), (f2, b2)) in enumerate(zip(fa, fb)):
            out, states[k] = resonator(
                seg, f1 + (f2 - f1) * frac, b1 + (b2 - b1) * frac, states[k]
            )
            acc += out
        y[start:start + block] = acc
    env = np.sin(np.pi * np.linspace(0, 1, n)) ** 0.6
    return rms_normalize(y * env, level)


def fricative(dur, centre, rng, level=0.12):
    n = int(dur * FS)
    noise = rng.standard_normal(n)
    y = resonator(noise, centre, 900) * 0.6
    env = np.sin(np.pi * np.linspace(0, 1, n))
    return rms_normalize(y * env, level)


def speech():
    rng = np.random.default_rng(20240611)
    parts = [
        np.zeros(int(0.10 * FS)),
        fricative(0.12, 3200, rng),
        voiced(0.22, "a", "e", 150, 140, rng),
        np.zeros(int(0.04 * FS)),
        voiced(0.20, "i", "u", 145, 130, rng, 0.8),
        fricative(0.10, 2500, rng),
        voiced(0.26, "o", "a", 135, 120, rng),
        np.zeros(int(0.12 * FS)),
        voiced(0.18, "e", "i", 140, 128, rng, 0.7),
        fricative(0.14, 3600, rng),
        voiced(0.24, "u", "o", 125, 110, rng, 0.9),
        np.zeros(int(0.06 * FS)),
        voiced(0.28, "a", "i", 120, 100, rng),
        fricative(0.09, 2800, rng),
        voiced(0.20, "o", "e", 115, 100, rng, 0.6),
        np.zeros(int(0.12 * FS)),
    ]
    x = np.concatenate(parts)
    x += 0.002 * rng.standard_normal(len(x)) * np.max(np.abs(x))
    return x


def write(path, x, peak=0.5):
    x = x / np.max(np.abs(x)) * peak * 32767
    pcm = np.clip(np.round(x), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(FS)
        w.writeframes(pcm.tobytes())


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
    out.mkdir(parents=True, exist_ok=True)
    write(out / "vowel.wav", vowel())
    write(out / "speech.wav", speech())


if __name__ == "__main__":
    main()
