//! Keyed time-segment scrambling.
//!
//! A super-frame of `N` sub-frames is rearranged according to a
//! [`PermutationTable`]: output sub-frame `i` is input sub-frame `perm[i]`,
//! optionally inverted. The table is the secret that travels (encrypted)
//! alongside the coded speech.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Samples per codec frame; sub-frames must be a whole number of these.
pub const CODEC_FRAME_LEN: usize = 160;
pub const MAX_FRAMES_PER_SUPER: usize = 256;
pub const TABLE_VERSION: u8 = 0x01;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScrambleError {
    #[error("invalid scrambler configuration: {0}")]
    InvalidConfig(String),
    #[error("super-frame of {got} samples does not split into {frames} equal sub-frames")]
    LengthMismatch { got: usize, frames: usize },
    #[error("unsupported table version {0:#04x}")]
    BadVersion(u8),
    #[error("permutation table truncated")]
    Truncated,
    #[error("{0} unexpected bytes after permutation table")]
    TrailingBytes(usize),
    #[error("table indexes are not a permutation")]
    NotAPermutation,
}

/// An unbounded, deterministic supply of bytes.
pub trait ByteSource {
    fn next_byte(&mut self) -> u8;
}

impl<T: ByteSource + ?Sized> ByteSource for &mut T {
    fn next_byte(&mut self) -> u8 {
        (**self).next_byte()
    }
}

/// What "inverting" a sub-frame means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InversionMode {
    /// Reverse the samples in time.
    #[default]
    Time,
    /// Flip the amplitude with a one's complement (`!x == -x - 1`), which is
    /// an exact involution over the full `i16` range.
    Sign,
}

impl FromStr for InversionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "time" => Ok(Self::Time),
            "sign" => Ok(Self::Sign),
            other => Err(format!("unknown inversion mode `{other}` (expected time|sign)")),
        }
    }
}

impl fmt::Display for InversionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Time => "time",
            Self::Sign => "sign",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScrambleConfig {
    sub_frame_len: usize,
    frames_per_super: usize,
    inversion: InversionMode,
}

impl Default for ScrambleConfig {
    fn default() -> Self {
        Self {
            sub_frame_len: CODEC_FRAME_LEN,
            frames_per_super: 16,
            inversion: InversionMode::Time,
        }
    }
}

impl ScrambleConfig {
    pub fn new(sub_frame_len: usize, frames_per_super: usize) -> Result<Self, ScrambleError> {
        if sub_frame_len == 0 || !sub_frame_len.is_multiple_of(CODEC_FRAME_LEN) {
            return Err(ScrambleError::InvalidConfig(format!(
                "sub-frame length {sub_frame_len} is not a positive multiple of {CODEC_FRAME_LEN}"
            )));
        }
        if u16::try_from(sub_frame_len).is_err() {
            return Err(ScrambleError::InvalidConfig(format!(
                "sub-frame length {sub_frame_len} does not fit in 16 bits"
            )));
        }
        if !(1..=MAX_FRAMES_PER_SUPER).contains(&frames_per_super) {
            return Err(ScrambleError::InvalidConfig(format!(
                "frames per super-frame {frames_per_super} outside 1..={MAX_FRAMES_PER_SUPER}"
            )));
        }
        Ok(Self {
            sub_frame_len,
            frames_per_super,
            inversion: InversionMode::Time,
        })
    }

    pub fn with_inversion(mut self, inversion: InversionMode) -> Self {
        self.inversion = inversion;
        self
    }

    pub fn sub_frame_len(&self) -> usize {
        self.sub_frame_len
    }

    pub fn frames_per_super(&self) -> usize {
        self.frames_per_super
    }

    pub fn inversion(&self) -> InversionMode {
        self.inversion
    }

    pub fn superframe_len(&self) -> usize {
        self.sub_frame_len * self.frames_per_super
    }

    /// Codec frames per sub-frame.
    pub fn codec_frames_per_sub(&self) -> usize {
        self.sub_frame_len / CODEC_FRAME_LEN
    }
}

/// Per-super-frame secret: a bijection over sub-frame positions plus one
/// inversion flag per output position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationTable {
    perm: Vec<u8>,
    invert_flags: Vec<bool>,
    superframe_index: u32,
}

impl PermutationTable {
    /// `perm[i]` is the source sub-frame placed at output position `i`.
    pub fn new(
        perm: Vec<u8>,
        invert_flags: Vec<bool>,
        superframe_index: u32,
    ) -> Result<Self, ScrambleError> {
        if perm.is_empty() || perm.len() > MAX_FRAMES_PER_SUPER {
            return Err(ScrambleError::NotAPermutation);
        }
        if invert_flags.len() != perm.len() {
            return Err(ScrambleError::LengthMismatch {
                got: invert_flags.len(),
                frames: perm.len(),
            });
        }
        if !is_bijection(&perm) {
            return Err(ScrambleError::NotAPermutation);
        }
        Ok(Self {
            perm,
            invert_flags,
            superframe_index,
        })
    }

    pub fn identity(frames: usize, superframe_index: u32) -> Self {
        assert!((1..=MAX_FRAMES_PER_SUPER).contains(&frames));
        Self {
            perm: (0..frames).map(|i| i as u8).collect(),
            invert_flags: vec![false; frames],
            superframe_index,
        }
    }

    pub fn perm(&self) -> &[u8] {
        &self.perm
    }

    pub fn invert_flags(&self) -> &[bool] {
        &self.invert_flags
    }

    pub fn superframe_index(&self) -> u32 {
        self.superframe_index
    }

    pub fn frames(&self) -> usize {
        self.perm.len()
    }

    /// Position at which each source sub-frame ends up.
    pub fn inverse_perm(&self) -> Vec<u8> {
        let mut inv = vec![0u8; self.perm.len()];
        for (pos, &src) in self.perm.iter().enumerate() {
            inv[src as usize] = pos as u8;
        }
        inv
    }
}

fn is_bijection(perm: &[u8]) -> bool {
    let mut seen = [false; MAX_FRAMES_PER_SUPER];
    perm.iter().all(|&p| {
        let p = p as usize;
        p < perm.len() && !std::mem::replace(&mut seen[p], true)
    })
}

/// Uniform draw from `0..=bound` by rejection sampling single bytes.
fn draw_index<S: ByteSource>(source: &mut S, bound: usize) -> usize {
    let span = bound + 1;
    debug_assert!(span <= 256);
    let limit = 256 - (256 % span);
    loop {
        let b = source.next_byte() as usize;
        if b < limit {
            return b % span;
        }
    }
}

/// Fisher-Yates shuffle of the identity, swapping position `i` (descending
/// from `n - 1` to 1) with a rejection-sampled `j` in `0..=i`.
pub(crate) fn shuffle<S: ByteSource>(source: &mut S, n: usize) -> Vec<u8> {
    let mut perm: Vec<u8> = (0..n).map(|i| i as u8).collect();
    for i in (1..n).rev() {
        let j = draw_index(source, i);
        perm.swap(i, j);
    }
    perm
}

/// Draws a table from `source`: the shuffle, then `ceil(N/8)` flag bytes
/// read least-significant bit first.
pub fn generate_table<S: ByteSource>(
    mut source: S,
    superframe_index: u32,
    config: &ScrambleConfig,
) -> PermutationTable {
    let n = config.frames_per_super();
    let perm = shuffle(&mut source, n);
    let flag_bytes: Vec<u8> = (0..n.div_ceil(8)).map(|_| source.next_byte()).collect();
    let invert_flags = (0..n).map(|k| flag_bytes[k / 8] >> (k % 8) & 1 == 1).collect();
    PermutationTable {
        perm,
        invert_flags,
        superframe_index,
    }
}

fn sub_frame_len(len: usize, table: &PermutationTable) -> Result<usize, ScrambleError> {
    let frames = table.frames();
    if !len.is_multiple_of(frames) {
        return Err(ScrambleError::LengthMismatch { got: len, frames });
    }
    Ok(len / frames)
}

fn invert_into(dst: &mut [i16], src: &[i16], mode: InversionMode) {
    match mode {
        InversionMode::Time => {
            for (d, s) in dst.iter_mut().zip(src.iter().rev()) {
                *d = *s;
            }
        }
        InversionMode::Sign => {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = !*s;
            }
        }
    }
}

pub fn scramble(
    superframe: &[i16],
    table: &PermutationTable,
    mode: InversionMode,
) -> Result<Vec<i16>, ScrambleError> {
    let l = sub_frame_len(superframe.len(), table)?;
    let mut out = vec![0i16; superframe.len()];
    if l == 0 {
        return Ok(out);
    }
    for (i, dst) in out.chunks_exact_mut(l).enumerate() {
        let src_idx = table.perm[i] as usize;
        let src = &superframe[src_idx * l..(src_idx + 1) * l];
        if table.invert_flags[i] {
            invert_into(dst, src, mode);
        } else {
            dst.copy_from_slice(src);
        }
    }
    Ok(out)
}

pub fn descramble(
    superframe: &[i16],
    table: &PermutationTable,
    mode: InversionMode,
) -> Result<Vec<i16>, ScrambleError> {
    let l = sub_frame_len(superframe.len(), table)?;
    let mut out = vec![0i16; superframe.len()];
    if l == 0 {
        return Ok(out);
    }
    for (i, src) in superframe.chunks_exact(l).enumerate() {
        let dst_idx = table.perm[i] as usize;
        let dst = &mut out[dst_idx * l..(dst_idx + 1) * l];
        if table.invert_flags[i] {
            // both inversions are involutions
            invert_into(dst, src, mode);
        } else {
            dst.copy_from_slice(src);
        }
    }
    Ok(out)
}

/// Wire layout: `[version][N-1][perm[0..N]][ceil(N/8) flag bytes, LSB first]`.
pub fn serialize_table(table: &PermutationTable) -> Vec<u8> {
    let n = table.frames();
    let mut out = Vec::with_capacity(2 + n + n.div_ceil(8));
    out.push(TABLE_VERSION);
    out.push((n - 1) as u8);
    out.extend_from_slice(&table.perm);
    let mut flags = vec![0u8; n.div_ceil(8)];
    for (k, &f) in table.invert_flags.iter().enumerate() {
        if f {
            flags[k / 8] |= 1 << (k % 8);
        }
    }
    out.extend_from_slice(&flags);
    out
}

pub fn serialized_table_len(frames: usize) -> usize {
    2 + frames + frames.div_ceil(8)
}

/// Parses [`serialize_table`] output. The super-frame index is not on the
/// wire; the caller supplies it from context.
pub fn deserialize_table(bytes: &[u8], superframe_index: u32) -> Result<PermutationTable, ScrambleError> {
    let (&version, rest) = bytes.split_first().ok_or(ScrambleError::Truncated)?;
    if version != TABLE_VERSION {
        return Err(ScrambleError::BadVersion(version));
    }
    let (&n_minus_one, rest) = rest.split_first().ok_or(ScrambleError::Truncated)?;
    let n = n_minus_one as usize + 1;
    let need = n + n.div_ceil(8);
    if rest.len() < need {
        return Err(ScrambleError::Truncated);
    }
    if rest.len() > need {
        return Err(ScrambleError::TrailingBytes(rest.len() - need));
    }
    let (perm, flags) = rest.split_at(n);
    if !is_bijection(perm) {
        return Err(ScrambleError::NotAPermutation);
    }
    let invert_flags = (0..n).map(|k| flags[k / 8] >> (k % 8) & 1 == 1).collect();
    Ok(PermutationTable {
        perm: perm.to_vec(),
        invert_flags,
        superframe_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Replays a fixed byte list; panics if the shuffle reads past it.
    struct Replay<'a> {
        bytes: &'a [u8],
        pos: usize,
    }

    impl ByteSource for Replay<'_> {
        fn next_byte(&mut self) -> u8 {
            let b = self.bytes[self.pos];
            self.pos += 1;
            b
        }
    }

    fn replay(bytes: &[u8]) -> Replay<'_> {
        Replay { bytes, pos: 0 }
    }

    fn cfg(n: usize) -> ScrambleConfig {
        ScrambleConfig::new(160, n).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(ScrambleConfig::new(160, 16).is_ok());
        assert!(ScrambleConfig::new(320, 256).is_ok());
        assert!(ScrambleConfig::new(0, 16).is_err());
        assert!(ScrambleConfig::new(100, 16).is_err());
        assert!(ScrambleConfig::new(160, 0).is_err());
        assert!(ScrambleConfig::new(160, 257).is_err());
        assert_eq!(ScrambleConfig::default(), cfg(16));
    }

    #[test]
    fn single_frame_table() {
        let t = generate_table(replay(&[0b1]), 3, &cfg(1));
        assert_eq!(t.perm(), &[0]);
        assert_eq!(t.invert_flags(), &[true]);
        assert_eq!(t.superframe_index(), 3);
    }

    #[test]
    fn two_frame_zero_byte_swaps() {
        let t = generate_table(replay(&[0x00, 0x00]), 0, &cfg(2));
        assert_eq!(t.perm(), &[1, 0]);
    }

    #[test]
    fn rejection_skips_biased_bytes() {
        // N=3, i=2: bytes >= 255 are rejected, so 0xff then 0x04 gives j=1
        let t = generate_table(replay(&[0xff, 0x04, 0x01, 0x00]), 0, &cfg(3));
        // swap(2,1) -> [0,2,1]; i=1: j = 1 % 2 = 1 -> unchanged
        assert_eq!(t.perm(), &[0, 2, 1]);
    }

    #[test]
    fn zero_key_table_vector() {
        // Hand-executed keystream + shuffle, cross-checked against an
        // independent DES; locked as a regression vector.
        let key = crate::des::DesKey::default();
        let t = generate_table(crate::des::keystream(&key, 0), 0, &cfg(16));
        assert_eq!(t.perm(), &[3, 10, 8, 13, 0, 4, 2, 6, 9, 5, 11, 14, 15, 7, 1, 12]);
        let flags: Vec<u8> = t.invert_flags().iter().map(|&f| f as u8).collect();
        assert_eq!(flags, [0, 1, 1, 0, 1, 0, 1, 1, 0, 1, 1, 0, 0, 0, 0, 0]);

        let t1 = generate_table(crate::des::keystream(&key, 1), 1, &cfg(16));
        assert_eq!(t1.perm(), &[9, 4, 2, 12, 13, 11, 5, 8, 0, 6, 15, 10, 3, 7, 1, 14]);
    }

    #[test]
    fn shuffle_is_exactly_uniform_for_three() {
        // Exhaustive over every byte sequence up to rejection depth 2.
        // Paths that finish within two bytes carry weight 256 (the third
        // byte is free); paths needing exactly three carry weight 1.
        let mut counts = std::collections::HashMap::<Vec<u8>, u64>::new();
        for b0 in 0..=255u8 {
            for b1 in 0..=255u8 {
                if b0 != 255 {
                    *counts.entry(shuffle(&mut replay(&[b0, b1]), 3)).or_default() += 256;
                } else if b1 != 255 {
                    for b2 in 0..=255u8 {
                        *counts.entry(shuffle(&mut replay(&[b0, b1, b2]), 3)).or_default() += 1;
                    }
                }
            }
        }
        assert_eq!(counts.len(), 6);
        let first = *counts.values().next().unwrap();
        assert!(counts.values().all(|&c| c == first), "{counts:?}");
    }

    #[test]
    fn scramble_small_example() {
        let t = PermutationTable::new(vec![1, 0], vec![true, false], 0).unwrap();
        let (a, b, c, d) = (1, 2, 3, 4);
        assert_eq!(scramble(&[a, b, c, d], &t, InversionMode::Time).unwrap(), [d, c, a, b]);
        assert_eq!(descramble(&[d, c, a, b], &t, InversionMode::Time).unwrap(), [a, b, c, d]);
    }

    #[test]
    fn sign_mode_covers_extremes() {
        let t = PermutationTable::new(vec![0], vec![true], 0).unwrap();
        let x = [i16::MIN, -1, 0, i16::MAX];
        let y = scramble(&x, &t, InversionMode::Sign).unwrap();
        assert_eq!(y, [i16::MAX, 0, -1, i16::MIN]);
        assert_eq!(descramble(&y, &t, InversionMode::Sign).unwrap(), x);
    }

    #[test]
    fn identity_is_fixed_point() {
        let t = PermutationTable::identity(4, 0);
        let x: Vec<i16> = (0..16).collect();
        assert_eq!(scramble(&x, &t, InversionMode::Time).unwrap(), x);
        assert_eq!(descramble(&x, &t, InversionMode::Time).unwrap(), x);
    }

    #[test]
    fn length_mismatch() {
        let t = PermutationTable::identity(3, 0);
        assert_eq!(
            scramble(&[0; 10], &t, InversionMode::Time),
            Err(ScrambleError::LengthMismatch { got: 10, frames: 3 })
        );
        assert!(descramble(&[0; 10], &t, InversionMode::Time).is_err());
    }

    #[test]
    fn table_constructor_validates() {
        assert!(PermutationTable::new(vec![0, 0], vec![false; 2], 0).is_err());
        assert!(PermutationTable::new(vec![0, 2], vec![false; 2], 0).is_err());
        assert!(PermutationTable::new(vec![0, 1], vec![false; 3], 0).is_err());
        assert!(PermutationTable::new(vec![], vec![], 0).is_err());
    }

    #[test]
    fn serialization_layout() {
        let t = PermutationTable::identity(1, 0);
        assert_eq!(serialize_table(&t), [0x01, 0x00, 0x00, 0x00]);
        let t16 = generate_table(replay(&[7u8; 64]), 0, &cfg(16));
        assert_eq!(serialize_table(&t16).len(), 20);
        assert_eq!(serialized_table_len(16), 20);
    }

    #[test]
    fn deserialization_cases() {
        let t = deserialize_table(&[0x01, 0x01, 0x01, 0x00, 0x01], 9).unwrap();
        assert_eq!(t.perm(), &[1, 0]);
        assert_eq!(t.invert_flags(), &[true, false]);
        assert_eq!(t.superframe_index(), 9);

        assert_eq!(
            deserialize_table(&[0x01, 0x01, 0x00, 0x00, 0x00], 0),
            Err(ScrambleError::NotAPermutation)
        );
        assert_eq!(
            deserialize_table(&[0x02, 0x00, 0x00, 0x00], 0),
            Err(ScrambleError::BadVersion(2))
        );
        assert_eq!(deserialize_table(&[], 0), Err(ScrambleError::Truncated));
        assert_eq!(deserialize_table(&[0x01], 0), Err(ScrambleError::Truncated));
        assert_eq!(deserialize_table(&[0x01, 0x01, 0x01, 0x00], 0), Err(ScrambleError::Truncated));
        assert_eq!(
            deserialize_table(&[0x01, 0x00, 0x00, 0x00, 0x00], 0),
            Err(ScrambleError::TrailingBytes(1))
        );
    }

    fn arb_table() -> impl Strategy<Value = PermutationTable> {
        (1usize..=256)
            .prop_flat_map(|n| {
                (
                    Just((0..n as u16).map(|i| i as u8).collect::<Vec<u8>>()).prop_shuffle(),
                    proptest::collection::vec(any::<bool>(), n),
                    any::<u32>(),
                )
            })
            .prop_map(|(perm, flags, s)| PermutationTable::new(perm, flags, s).unwrap())
    }

    proptest! {
        #[test]
        fn descramble_inverts_scramble(t in arb_table(), l in 1usize..6, seed in any::<u64>(), sign in any::<bool>()) {
            let mode = if sign { InversionMode::Sign } else { InversionMode::Time };
            let mut rng = seed;
            let x: Vec<i16> = (0..t.frames() * l).map(|_| {
                rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (rng >> 48) as i16
            }).collect();
            let y = scramble(&x, &t, mode).unwrap();
            prop_assert_eq!(descramble(&y, &t, mode).unwrap(), x.clone());
            if mode == InversionMode::Time {
                let (mut a, mut b) = (x, y);
                a.sort_unstable();
                b.sort_unstable();
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn serialization_round_trip(t in arb_table()) {
            let bytes = serialize_table(&t);
            prop_assert_eq!(bytes.len(), serialized_table_len(t.frames()));
            prop_assert_eq!(deserialize_table(&bytes, t.superframe_index()).unwrap(), t);
        }

        #[test]
        fn generated_tables_are_bijections(key in any::<[u8; 8]>(), n in 1usize..=256, s in any::<u32>()) {
            let key = crate::des::DesKey::new(key);
            let t = generate_table(crate::des::keystream(&key, s), s, &cfg(n));
            prop_assert_eq!(t.frames(), n);
            prop_assert!(is_bijection(t.perm()));
        }
    }
}
