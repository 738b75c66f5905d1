#!/usr/bin/env python3
"""Independent DES reference used to freeze the cipher test vectors.

    python3 scripts/des_oracle.py

Single DES is TripleDES with K1 = K2 = K3 (the `cryptography` package
keeps it under `decrepit`). Prints block, keystream and CBC vectors.
"""

import warnings

from cryptography.hazmat.primitives import padding
from cryptography.hazmat.primitives.ciphers import Cipher, modes

try:
    from cryptography.hazmat.decrepit.ciphers.algorithms import TripleDES
except ImportError:  # older releases
    from cryptography.hazmat.primitives.ciphers.algorithms import TripleDES

warnings.simplefilter("ignore")


def des_ecb(key, block):
    enc = Cipher(TripleDES(key * 3), modes.ECB()).encryptor()
    return enc.update(block) + enc.finalize()


def des_cbc(key, iv, data):
    padder = padding.PKCS7(64).padder()
    padded = padder.update(data) + padder.finalize()
    enc = Cipher(TripleDES(key * 3), modes.CBC(iv)).encryptor()
    return enc.update(padded) + enc.finalize()


def keystream(key, s, blocks):
    return b"".join(des_ecb(key, ((s << 32) | j).to_bytes(8, "big")) for j in range(blocks))


def main():
    zero = bytes(8)
    print("E(0, 0)                 ", des_ecb(zero, zero).hex())
    k = bytes.fromhex("133457799bbcdff1")
    print("E(133457799bbcdff1, 0123456789abcdef)", des_ecb(k, bytes.fromhex("0123456789abcdef")).hex())
    print("keystream(0, s=0)[0:24] ", keystream(zero, 0, 3).hex())
    for weak in ["0101010101010101", "fefefefefefefefe", "e0e0e0e0f1f1f1f1", "1f1f1f1f0e0e0e0e"]:
        wk = bytes.fromhex(weak)
        p = bytes.fromhex("0123456789abcdef")
        assert des_ecb(wk, des_ecb(wk, p)) == p
    table = bytes.fromhex("010f030a080d0004020609050b0e0f07010cd606")
    iv = des_ecb(zero, (0).to_bytes(8, "big"))
    print("IV(0, s=0)              ", iv.hex())
    print("CBC(0, IV, table)       ", des_cbc(zero, iv, table).hex())


if __name__ == "__main__":
    main()
