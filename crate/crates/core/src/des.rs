//! DES (FIPS 46-3) block cipher, CBC mode with PKCS#7 padding, and a
//! counter-mode keystream used to drive the scrambler's shuffle.
//!
//! Blocks and keys are handled as big-endian 64-bit words so that bit 1 in
//! the standard's numbering is the most significant bit of byte 0.

use thiserror::Error;

use crate::scrambler::ByteSource;

pub const BLOCK_LEN: usize = 8;

/// A 64-bit data block.
pub type Block64 = [u8; BLOCK_LEN];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DesError {
    #[error("ciphertext length {0} is not a positive multiple of 8")]
    BadLength(usize),
    #[error("invalid PKCS#7 padding")]
    BadPadding,
}

/// 64-bit DES key. The eight parity bits are carried but never checked.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DesKey([u8; 8]);

impl DesKey {
    pub const fn new(bytes: [u8; 8]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 8] {
        &self.0
    }

    fn as_u64(&self) -> u64 {
        u64::from_be_bytes(self.0)
    }

    /// Parses 16 hex digits (surrounding whitespace allowed).
    pub fn from_hex(text: &str) -> Option<Self> {
        let text = text.trim();
        if text.len() != 16 || !text.is_ascii() {
            return None;
        }
        let mut out = [0u8; 8];
        for (i, byte) in out.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&text[2 * i..2 * i + 2], 16).ok()?;
        }
        Some(Self(out))
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Bitwise complement of every key bit, parity included.
    pub fn complement(&self) -> Self {
        Self(self.0.map(|b| !b))
    }
}

impl From<[u8; 8]> for DesKey {
    fn from(bytes: [u8; 8]) -> Self {
        Self(bytes)
    }
}

// Key material stays out of debug output.
impl std::fmt::Debug for DesKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("DesKey(..)")
    }
}

// Permutation tables, 1-based bit positions counted from the MSB.

const IP: [u8; 64] = [
    58, 50, 42, 34, 26, 18, 10, 2, 60, 52, 44, 36, 28, 20, 12, 4, //
    62, 54, 46, 38, 30, 22, 14, 6, 64, 56, 48, 40, 32, 24, 16, 8, //
    57, 49, 41, 33, 25, 17, 9, 1, 59, 51, 43, 35, 27, 19, 11, 3, //
    61, 53, 45, 37, 29, 21, 13, 5, 63, 55, 47, 39, 31, 23, 15, 7,
];

const FP: [u8; 64] = [
    40, 8, 48, 16, 56, 24, 64, 32, 39, 7, 47, 15, 55, 23, 63, 31, //
    38, 6, 46, 14, 54, 22, 62, 30, 37, 5, 45, 13, 53, 21, 61, 29, //
    36, 4, 44, 12, 52, 20, 60, 28, 35, 3, 43, 11, 51, 19, 59, 27, //
    34, 2, 42, 10, 50, 18, 58, 26, 33, 1, 41, 9, 49, 17, 57, 25,
];

const E: [u8; 48] = [
    32, 1, 2, 3, 4, 5, 4, 5, 6, 7, 8, 9, //
    8, 9, 10, 11, 12, 13, 12, 13, 14, 15, 16, 17, //
    16, 17, 18, 19, 20, 21, 20, 21, 22, 23, 24, 25, //
    24, 25, 26, 27, 28, 29, 28, 29, 30, 31, 32, 1,
];

const P: [u8; 32] = [
    16, 7, 20, 21, 29, 12, 28, 17, 1, 15, 23, 26, 5, 18, 31, 10, //
    2, 8, 24, 14, 32, 27, 3, 9, 19, 13, 30, 6, 22, 11, 4, 25,
];

const PC1: [u8; 56] = [
    57, 49, 41, 33, 25, 17, 9, 1, 58, 50, 42, 34, 26, 18, //
    10, 2, 59, 51, 43, 35, 27, 19, 11, 3, 60, 52, 44, 36, //
    63, 55, 47, 39, 31, 23, 15, 7, 62, 54, 46, 38, 30, 22, //
    14, 6, 61, 53, 45, 37, 29, 21, 13, 5, 28, 20, 12, 4,
];

const PC2: [u8; 48] = [
    14, 17, 11, 24, 1, 5, 3, 28, 15, 6, 21, 10, //
    23, 19, 12, 4, 26, 8, 16, 7, 27, 20, 13, 2, //
    41, 52, 31, 37, 47, 55, 30, 40, 51, 45, 33, 48, //
    44, 49, 39, 56, 34, 53, 46, 42, 50, 36, 29, 32,
];

const ROTATIONS: [u32; 16] = [1, 1, 2, 2, 2, 2, 2, 2, 1, 2, 2, 2, 2, 2, 2, 1];

const SBOX: [[u8; 64]; 8] = [
    [
        14, 4, 13, 1, 2, 15, 11, 8, 3, 10, 6, 12, 5, 9, 0, 7, //
        0, 15, 7, 4, 14, 2, 13, 1, 10, 6, 12, 11, 9, 5, 3, 8, //
        4, 1, 14, 8, 13, 6, 2, 11, 15, 12, 9, 7, 3, 10, 5, 0, //
        15, 12, 8, 2, 4, 9, 1, 7, 5, 11, 3, 14, 10, 0, 6, 13,
    ],
    [
        15, 1, 8, 14, 6, 11, 3, 4, 9, 7, 2, 13, 12, 0, 5, 10, //
        3, 13, 4, 7, 15, 2, 8, 14, 12, 0, 1, 10, 6, 9, 11, 5, //
        0, 14, 7, 11, 10, 4, 13, 1, 5, 8, 12, 6, 9, 3, 2, 15, //
        13, 8, 10, 1, 3, 15, 4, 2, 11, 6, 7, 12, 0, 5, 14, 9,
    ],
    [
        10, 0, 9, 14, 6, 3, 15, 5, 1, 13, 12, 7, 11, 4, 2, 8, //
        13, 7, 0, 9, 3, 4, 6, 10, 2, 8, 5, 14, 12, 11, 15, 1, //
        13, 6, 4, 9, 8, 15, 3, 0, 11, 1, 2, 12, 5, 10, 14, 7, //
        1, 10, 13, 0, 6, 9, 8, 7, 4, 15, 14, 3, 11, 5, 2, 12,
    ],
    [
        7, 13, 14, 3, 0, 6, 9, 10, 1, 2, 8, 5, 11, 12, 4, 15, //
        13, 8, 11, 5, 6, 15, 0, 3, 4, 7, 2, 12, 1, 10, 14, 9, //
        10, 6, 9, 0, 12, 11, 7, 13, 15, 1, 3, 14, 5, 2, 8, 4, //
        3, 15, 0, 6, 10, 1, 13, 8, 9, 4, 5, 11, 12, 7, 2, 14,
    ],
    [
        2, 12, 4, 1, 7, 10, 11, 6, 8, 5, 3, 15, 13, 0, 14, 9, //
        14, 11, 2, 12, 4, 7, 13, 1, 5, 0, 15, 10, 3, 9, 8, 6, //
        4, 2, 1, 11, 10, 13, 7, 8, 15, 9, 12, 5, 6, 3, 0, 14, //
        11, 8, 12, 7, 1, 14, 2, 13, 6, 15, 0, 9, 10, 4, 5, 3,
    ],
    [
        12, 1, 10, 15, 9, 2, 6, 8, 0, 13, 3, 4, 14, 7, 5, 11, //
        10, 15, 4, 2, 7, 12, 9, 5, 6, 1, 13, 14, 0, 11, 3, 8, //
        9, 14, 15, 5, 2, 8, 12, 3, 7, 0, 4, 10, 1, 13, 11, 6, //
        4, 3, 2, 12, 9, 5, 15, 10, 11, 14, 1, 7, 6, 0, 8, 13,
    ],
    [
        4, 11, 2, 14, 15, 0, 8, 13, 3, 12, 9, 7, 5, 10, 6, 1, //
        13, 0, 11, 7, 4, 9, 1, 10, 14, 3, 5, 12, 2, 15, 8, 6, //
        1, 4, 11, 13, 12, 3, 7, 14, 10, 15, 6, 8, 0, 5, 9, 2, //
        6, 11, 13, 8, 1, 4, 10, 7, 9, 5, 0, 15, 14, 2, 3, 12,
    ],
    [
        13, 2, 8, 4, 6, 15, 11, 1, 10, 9, 3, 14, 5, 0, 12, 7, //
        1, 15, 13, 8, 10, 3, 7, 4, 12, 5, 6, 11, 0, 14, 9, 2, //
        7, 11, 4, 1, 9, 12, 14, 2, 0, 6, 10, 13, 15, 3, 5, 8, //
        2, 1, 14, 7, 4, 10, 8, 13, 15, 12, 9, 0, 3, 5, 6, 11,
    ],
];

/// Applies a bit-selection table to the low `in_bits` bits of `input`.
fn permute(input: u64, in_bits: u32, table: &[u8]) -> u64 {
    table.iter().fold(0u64, |acc, &pos| {
        (acc << 1) | ((input >> (in_bits - u32::from(pos))) & 1)
    })
}

fn rotl28(half: u64, n: u32) -> u64 {
    ((half << n) | (half >> (28 - n))) & 0x0FFF_FFFF
}

/// The sixteen 48-bit round keys, stored in the low bits of each `u64`.
#[derive(Clone, PartialEq, Eq)]
pub struct RoundKeySchedule([u64; 16]);

impl RoundKeySchedule {
    pub fn keys(&self) -> &[u64; 16] {
        &self.0
    }
}

impl std::fmt::Debug for RoundKeySchedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("RoundKeySchedule(..)")
    }
}

pub fn key_schedule(key: &DesKey) -> RoundKeySchedule {
    let cd = permute(key.as_u64(), 64, &PC1);
    let mut c = cd >> 28;
    let mut d = cd & 0x0FFF_FFFF;
    let mut keys = [0u64; 16];
    for (round, &shift) in ROTATIONS.iter().enumerate() {
        c = rotl28(c, shift);
        d = rotl28(d, shift);
        keys[round] = permute((c << 28) | d, 56, &PC2);
    }
    RoundKeySchedule(keys)
}

fn feistel(right: u32, round_key: u64) -> u32 {
    let x = permute(u64::from(right), 32, &E) ^ round_key;
    let mut s_out = 0u32;
    for (i, sbox) in SBOX.iter().enumerate() {
        let six = ((x >> (42 - 6 * i)) & 0x3F) as usize;
        let row = ((six & 0x20) >> 4) | (six & 1);
        let col = (six >> 1) & 0x0F;
        s_out = (s_out << 4) | u32::from(sbox[row * 16 + col]);
    }
    permute(u64::from(s_out), 32, &P) as u32
}

/// A keyed DES instance. Cheap to share; the schedule is computed once.
#[derive(Clone, Debug)]
pub struct Des {
    schedule: RoundKeySchedule,
}

impl Des {
    pub fn new(key: &DesKey) -> Self {
        Self {
            schedule: key_schedule(key),
        }
    }

    fn crypt(&self, block: Block64, decrypt: bool) -> Block64 {
        let ip = permute(u64::from_be_bytes(block), 64, &IP);
        let mut left = (ip >> 32) as u32;
        let mut right = ip as u32;
        for round in 0..16 {
            let k = if decrypt {
                self.schedule.0[15 - round]
            } else {
                self.schedule.0[round]
            };
            let next = left ^ feistel(right, k);
            left = right;
            right = next;
        }
        // final swap before the inverse initial permutation
        let preoutput = (u64::from(right) << 32) | u64::from(left);
        permute(preoutput, 64, &FP).to_be_bytes()
    }

    pub fn encrypt_block(&self, block: Block64) -> Block64 {
        self.crypt(block, false)
    }

    pub fn decrypt_block(&self, block: Block64) -> Block64 {
        self.crypt(block, true)
    }

    pub fn cbc_encrypt(&self, iv: Block64, plaintext: &[u8]) -> Vec<u8> {
        let pad = BLOCK_LEN - plaintext.len() % BLOCK_LEN;
        let mut data = Vec::with_capacity(plaintext.len() + pad);
        data.extend_from_slice(plaintext);
        data.resize(plaintext.len() + pad, pad as u8);

        let mut chain = iv;
        for chunk in data.chunks_exact_mut(BLOCK_LEN) {
            let mut block = [0u8; BLOCK_LEN];
            for (b, (p, c)) in block.iter_mut().zip(chunk.iter().zip(chain)) {
                *b = p ^ c;
            }
            chain = self.encrypt_block(block);
            chunk.copy_from_slice(&chain);
        }
        data
    }

    pub fn cbc_decrypt(&self, iv: Block64, ciphertext: &[u8]) -> Result<Vec<u8>, DesError> {
        if ciphertext.is_empty() || !ciphertext.len().is_multiple_of(BLOCK_LEN) {
            return Err(DesError::BadLength(ciphertext.len()));
        }
        let mut out = Vec::with_capacity(ciphertext.len());
        let mut chain = iv;
        for chunk in ciphertext.chunks_exact(BLOCK_LEN) {
            let block: Block64 = chunk.try_into().unwrap();
            let plain = self.decrypt_block(block);
            out.extend(plain.iter().zip(chain).map(|(p, c)| p ^ c));
            chain = block;
        }

        let pad = *out.last().unwrap() as usize;
        if pad == 0 || pad > BLOCK_LEN || out[out.len() - pad..].iter().any(|&b| b as usize != pad) {
            return Err(DesError::BadPadding);
        }
        out.truncate(out.len() - pad);
        Ok(out)
    }

    /// Keystream for one super-frame; see [`Keystream`].
    pub fn keystream(&self, superframe_index: u32) -> Keystream {
        Keystream::from_cipher(self.clone(), superframe_index)
    }
}

pub fn encrypt_block(key: &DesKey, block: Block64) -> Block64 {
    Des::new(key).encrypt_block(block)
}

pub fn decrypt_block(key: &DesKey, block: Block64) -> Block64 {
    Des::new(key).decrypt_block(block)
}

/// CBC encryption with PKCS#7 padding; an aligned input gains a full pad block.
pub fn cbc_encrypt(key: &DesKey, iv: Block64, plaintext: &[u8]) -> Vec<u8> {
    Des::new(key).cbc_encrypt(iv, plaintext)
}

pub fn cbc_decrypt(key: &DesKey, iv: Block64, ciphertext: &[u8]) -> Result<Vec<u8>, DesError> {
    Des::new(key).cbc_decrypt(iv, ciphertext)
}

pub fn keystream(key: &DesKey, superframe_index: u32) -> Keystream {
    Keystream::new(key, superframe_index)
}

/// Unbounded byte stream `E_k(BE64(s * 2^32 + j))` for j = 0, 1, 2, ...
///
/// Each super-frame gets its own 2^32-block counter range. The stream
/// wraps after 2^35 bytes, far beyond any table's needs.
#[derive(Clone, Debug)]
pub struct Keystream {
    cipher: Des,
    superframe_index: u32,
    counter: u32,
    block: Block64,
    pos: usize,
}

impl Keystream {
    pub fn new(key: &DesKey, superframe_index: u32) -> Self {
        Self::from_cipher(Des::new(key), superframe_index)
    }

    fn from_cipher(cipher: Des, superframe_index: u32) -> Self {
        Self {
            cipher,
            superframe_index,
            counter: 0,
            block: [0; BLOCK_LEN],
            pos: BLOCK_LEN,
        }
    }

    /// Counter value fed to the cipher for the `j`-th block of this stream.
    pub fn counter_block(superframe_index: u32, j: u32) -> u64 {
        (u64::from(superframe_index) << 32) | u64::from(j)
    }
}

impl ByteSource for Keystream {
    fn next_byte(&mut self) -> u8 {
        if self.pos == BLOCK_LEN {
            let ctr = Self::counter_block(self.superframe_index, self.counter);
            self.block = self.cipher.encrypt_block(ctr.to_be_bytes());
            self.counter = self.counter.wrapping_add(1);
            self.pos = 0;
        }
        let b = self.block[self.pos];
        self.pos += 1;
        b
    }
}

impl Iterator for Keystream {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        Some(self.next_byte())
    }
}
