#!/usr/bin/env python3
"""Reference GSM 06.10 fixtures from libgsm (through libsndfile).

    pip install soundfile
    python3 scripts/gsm_oracle.py crates/core/tests/data

For each bundled WAV, writes <name>.gsm (33-byte frames from the libgsm
encoder) and <name>.gsm.pcm (libgsm decoder output, 16-bit LE). Also
writes random.gsm, 200 frames of random payload bits, and its decoded
random.gsm.pcm.
"""

import sys
from pathlib import Path

import numpy as np
import soundfile as sf


def decode(path):
    pcm, _ = sf.read(path, dtype="int16", format="RAW", subtype="GSM610",
                     samplerate=8000, channels=1)
    return pcm


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
    for name in ["vowel", "speech"]:
        x, fs = sf.read(out / f"{name}.wav", dtype="int16")
        assert fs == 8000
        sf.write(out / f"{name}.gsm", x, 8000, format="RAW", subtype="GSM610")
        decode(out / f"{name}.gsm").astype("<i2").tofile(out / f"{name}.gsm.pcm")

    rng = np.random.default_rng(7)
    frames = rng.integers(0, 256, size=(200, 33), dtype=np.uint8)
    frames[:, 0] = 0xD0 | (frames[:, 0] & 0x0F)
    frames.tofile(out / "random.gsm")
    decode(out / "random.gsm").astype("<i2").tofile(out / "random.gsm.pcm")


if __name__ == "__main__":
    main()
