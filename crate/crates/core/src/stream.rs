//! The secure stream: scramble, encode, and carry the encrypted permutation
//! table of every super-frame in-band with its codec frames.
//!
//! Layout (all integers big-endian):
//!
//! ```text
//! header  "GVS1" | cipher_id u8 | sub_frame_len u16 | frames_per_super u16
//!         | superframe_count u32 | original_length u64
//! record  iv [8] | table_ct_len u16 | table ciphertext | N*L/160 frames of 33 bytes
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::codec::{self, CodecFrame, Decoder, Encoder, FRAME_LEN, PACKED_FRAME_LEN};
use crate::des::{Des, DesError, DesKey};
use crate::scrambler::{self, InversionMode, PermutationTable, ScrambleConfig, ScrambleError};
use crate::speech_io::{pad_to_superframe, PcmSignal};

pub const MAGIC: [u8; 4] = *b"GVS1";
pub const CIPHER_DES_CBC: u8 = 0x01;
pub const HEADER_LEN: usize = 21;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("bad stream header: {0}")]
    BadHeader(String),
    #[error("stream truncated")]
    Truncated,
    #[error("{0} unexpected bytes after the last record")]
    TrailingBytes(usize),
    #[error("decryption failed in super-frame {superframe}: {cause}")]
    DecryptionFailed {
        superframe: u32,
        #[source]
        cause: TableFailure,
    },
    #[error("bit error rate {0} outside [0, 1]")]
    BadBitErrorRate(f64),
}

/// Why a table ciphertext did not yield a usable table. Any of these means
/// a wrong key or a tampered stream.
#[derive(Debug, Error)]
pub enum TableFailure {
    #[error(transparent)]
    Cipher(#[from] DesError),
    #[error(transparent)]
    Table(#[from] ScrambleError),
    #[error("table covers {got} sub-frames, stream expects {expected}")]
    WrongSize { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamHeader {
    pub cipher_id: u8,
    pub sub_frame_len: u16,
    pub frames_per_super: u16,
    pub superframe_count: u32,
    pub original_length: u64,
}

impl StreamHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..4].copy_from_slice(&MAGIC);
        out[4] = self.cipher_id;
        out[5..7].copy_from_slice(&self.sub_frame_len.to_be_bytes());
        out[7..9].copy_from_slice(&self.frames_per_super.to_be_bytes());
        out[9..13].copy_from_slice(&self.superframe_count.to_be_bytes());
        out[13..21].copy_from_slice(&self.original_length.to_be_bytes());
        out
    }

    /// Parses and validates the first [`HEADER_LEN`] bytes.
    pub fn parse(bytes: &[u8]) -> Result<Self, StreamError> {
        if bytes.len() < HEADER_LEN {
            return Err(StreamError::Truncated);
        }
        if bytes[..4] != MAGIC {
            return Err(StreamError::BadHeader("magic is not GVS1".into()));
        }
        let header = Self {
            cipher_id: bytes[4],
            sub_frame_len: u16::from_be_bytes([bytes[5], bytes[6]]),
            frames_per_super: u16::from_be_bytes([bytes[7], bytes[8]]),
            superframe_count: u32::from_be_bytes(bytes[9..13].try_into().unwrap()),
            original_length: u64::from_be_bytes(bytes[13..21].try_into().unwrap()),
        };
        if header.cipher_id != CIPHER_DES_CBC {
            return Err(StreamError::BadHeader(format!(
                "unsupported cipher id {:#04x}",
                header.cipher_id
            )));
        }
        header.config()?;
        let capacity = u64::from(header.superframe_count) * header.superframe_len() as u64;
        if header.original_length > capacity {
            return Err(StreamError::BadHeader(format!(
                "original length {} exceeds the {capacity} samples carried",
                header.original_length
            )));
        }
        Ok(header)
    }

    pub fn config(&self) -> Result<ScrambleConfig, StreamError> {
        ScrambleConfig::new(self.sub_frame_len.into(), self.frames_per_super.into())
            .map_err(|e| StreamError::BadHeader(e.to_string()))
    }

    pub fn superframe_len(&self) -> usize {
        usize::from(self.sub_frame_len) * usize::from(self.frames_per_super)
    }

    pub fn codec_frames_per_record(&self) -> usize {
        self.superframe_len() / FRAME_LEN
    }
}

/// One super-frame record, borrowed from the stream bytes.
#[derive(Debug, Clone, Copy)]
pub struct SuperFrameRecord<'a> {
    pub iv: [u8; 8],
    pub table_ciphertext: &'a [u8],
    /// Packed codec frames, 33 bytes each.
    pub frames: &'a [u8],
    /// Offset of `frames` within the stream.
    pub frames_offset: usize,
}

impl SuperFrameRecord<'_> {
    pub fn packed_frames(&self) -> impl Iterator<Item = &[u8]> {
        self.frames.chunks_exact(PACKED_FRAME_LEN)
    }
}

/// Splits a stream into its header and records.
pub fn parse_stream(bytes: &[u8]) -> Result<(StreamHeader, Vec<SuperFrameRecord<'_>>), StreamError> {
    let header = StreamHeader::parse(bytes)?;
    let frames_len = header.codec_frames_per_record() * PACKED_FRAME_LEN;
    let mut pos = HEADER_LEN;
    let mut take = |n: usize| -> Result<(usize, &[u8]), StreamError> {
        let start = pos;
        let chunk = bytes.get(start..start + n).ok_or(StreamError::Truncated)?;
        pos += n;
        Ok((start, chunk))
    };
    let mut records = Vec::new();
    for _ in 0..header.superframe_count {
        let (_, iv) = take(8)?;
        let (_, ct_len) = take(2)?;
        let ct_len = u16::from_be_bytes([ct_len[0], ct_len[1]]);
        let (_, table_ciphertext) = take(ct_len.into())?;
        let (frames_offset, frames) = take(frames_len)?;
        records.push(SuperFrameRecord {
            iv: iv.try_into().unwrap(),
            table_ciphertext,
            frames,
            frames_offset,
        });
    }
    if pos != bytes.len() {
        return Err(StreamError::TrailingBytes(bytes.len() - pos));
    }
    Ok((header, records))
}

/// IV of super-frame `s`: `E_k(BE64(s))`.
fn superframe_iv(cipher: &Des, s: u32) -> [u8; 8] {
    cipher.encrypt_block(u64::from(s).to_be_bytes())
}

pub fn encrypt_stream(signal: &PcmSignal, key: &DesKey, config: &ScrambleConfig) -> Vec<u8> {
    let cipher = Des::new(key);
    encrypt_stream_with_tables(signal, key, config, |s| {
        scrambler::generate_table(cipher.keystream(s), s, config)
    })
}

/// [`encrypt_stream`] with the permutation tables supplied by `tables`
/// instead of the keystream. Intended for tests (e.g. forcing identity
/// tables); the table must cover `config.frames_per_super()` sub-frames.
pub fn encrypt_stream_with_tables(
    signal: &PcmSignal,
    key: &DesKey,
    config: &ScrambleConfig,
    mut tables: impl FnMut(u32) -> PermutationTable,
) -> Vec<u8> {
    let cipher = Des::new(key);
    let unit = config.superframe_len();
    let (padded, original_length) =
        pad_to_superframe(signal, config.sub_frame_len(), config.frames_per_super());
    let count = u32::try_from(padded.len() / unit).expect("more than 2^32 super-frames");

    let header = StreamHeader {
        cipher_id: CIPHER_DES_CBC,
        sub_frame_len: config.sub_frame_len() as u16,
        frames_per_super: config.frames_per_super() as u16,
        superframe_count: count,
        original_length: original_length as u64,
    };
    let table_ct_len = (scrambler::serialized_table_len(config.frames_per_super()) / 8 + 1) * 8;
    let record_len = 10 + table_ct_len + header.codec_frames_per_record() * PACKED_FRAME_LEN;
    let mut out = Vec::with_capacity(HEADER_LEN + count as usize * record_len);
    out.extend_from_slice(&header.to_bytes());

    let mut encoder = Encoder::new();
    for (s, superframe) in (0..count).zip(padded.samples().chunks_exact(unit)) {
        let table = tables(s);
        assert_eq!(table.frames(), config.frames_per_super(), "table size");
        let scrambled = scrambler::scramble(superframe, &table, config.inversion())
            .expect("super-frame length matches the table");
        let iv = superframe_iv(&cipher, s);
        let table_ct = cipher.cbc_encrypt(iv, &scrambler::serialize_table(&table));
        out.extend_from_slice(&iv);
        out.extend_from_slice(&(table_ct.len() as u16).to_be_bytes());
        out.extend_from_slice(&table_ct);
        for frame in scrambled.chunks_exact(FRAME_LEN) {
            let coded = encoder.encode_frame(frame).expect("frame is 160 samples");
            out.extend_from_slice(&codec::pack_frame(&coded));
        }
    }
    out
}

/// Decodes one record's frames through the shared decoder state. A frame
/// with a bad signature nibble is replaced by the silence frame.
fn decode_record(decoder: &mut Decoder, record: &SuperFrameRecord<'_>, out: &mut Vec<i16>) {
    for packed in record.packed_frames() {
        let frame = codec::unpack_frame(packed).unwrap_or(CodecFrame::silence());
        let pcm = decoder
            .decode_frame(&frame)
            .expect("unpacked fields always fit their bit widths");
        out.extend_from_slice(&pcm);
    }
}

/// Decrypts and deserializes the table carried by record `s`.
pub fn recover_table(
    cipher: &Des,
    header: &StreamHeader,
    record: &SuperFrameRecord<'_>,
    s: u32,
) -> Result<PermutationTable, StreamError> {
    let fail = |cause: TableFailure| StreamError::DecryptionFailed { superframe: s, cause };
    let plain = cipher
        .cbc_decrypt(record.iv, record.table_ciphertext)
        .map_err(|e| fail(e.into()))?;
    let table = scrambler::deserialize_table(&plain, s).map_err(|e| fail(e.into()))?;
    let expected = usize::from(header.frames_per_super);
    if table.frames() != expected {
        return Err(fail(TableFailure::WrongSize { got: table.frames(), expected }));
    }
    Ok(table)
}

/// Receiver side. `inversion` is not carried in the stream and must match
/// the sender's.
pub fn decrypt_stream(
    bytes: &[u8],
    key: &DesKey,
    inversion: InversionMode,
) -> Result<PcmSignal, StreamError> {
    let (header, records) = parse_stream(bytes)?;
    let cipher = Des::new(key);
    let unit = header.superframe_len();
    let mut decoder = Decoder::new();
    let mut out = Vec::with_capacity(records.len() * unit);
    let mut decoded = Vec::with_capacity(unit);
    for (s, record) in (0u32..).zip(&records) {
        decoded.clear();
        decode_record(&mut decoder, record, &mut decoded);
        let table = recover_table(&cipher, &header, record, s)?;
        let plain = scrambler::descramble(&decoded, &table, inversion)
            .expect("record length matches the table");
        out.extend_from_slice(&plain);
    }
    out.truncate(header.original_length as usize);
    Ok(PcmSignal::new(out))
}

/// What a receiver with the codec but without the key hears: every frame
/// decoded, nothing descrambled, padding kept.
pub fn eavesdrop_stream(bytes: &[u8]) -> Result<PcmSignal, StreamError> {
    let (header, records) = parse_stream(bytes)?;
    let mut decoder = Decoder::new();
    let mut out = Vec::with_capacity(records.len() * header.superframe_len());
    for record in &records {
        decode_record(&mut decoder, record, &mut out);
    }
    Ok(PcmSignal::new(out))
}

/// The scrambled signal as it enters the encoder (padded to whole
/// super-frames). It never exists on the wire.
pub fn scrambled_signal(signal: &PcmSignal, key: &DesKey, config: &ScrambleConfig) -> PcmSignal {
    let cipher = Des::new(key);
    let unit = config.superframe_len();
    let (padded, _) = pad_to_superframe(signal, config.sub_frame_len(), config.frames_per_super());
    let mut out = Vec::with_capacity(padded.len());
    for (s, superframe) in (0u32..).zip(padded.samples().chunks_exact(unit)) {
        let table = scrambler::generate_table(cipher.keystream(s), s, config);
        out.extend(scrambler::scramble(superframe, &table, config.inversion()).expect("length"));
    }
    PcmSignal::new(out)
}

/// Flips each codec payload bit (the 260 bits after the signature nibble)
/// with probability `bit_error_rate`. Header, IVs and table ciphertexts are
/// left alone. Deterministic in `seed`.
pub fn inject_bit_errors(bytes: &[u8], bit_error_rate: f64, seed: u64) -> Result<Vec<u8>, StreamError> {
    if !(0.0..=1.0).contains(&bit_error_rate) {
        return Err(StreamError::BadBitErrorRate(bit_error_rate));
    }
    let (_, records) = parse_stream(bytes)?;
    let mut out = bytes.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for record in &records {
        for f in 0..record.frames.len() / PACKED_FRAME_LEN {
            let base = record.frames_offset + f * PACKED_FRAME_LEN;
            for bit in 4..PACKED_FRAME_LEN * 8 {
                if rng.gen_bool(bit_error_rate) {
                    out[base + bit / 8] ^= 0x80 >> (bit % 8);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tone(len: usize) -> PcmSignal {
        PcmSignal::new(
            (0..len)
                .map(|n| (6000.0 * (n as f64 * 0.11).sin() + 2000.0 * (n as f64 * 0.53).sin()) as i16)
                .collect(),
        )
    }

    const KEY: DesKey = DesKey::new([0x13, 0x34, 0x57, 0x79, 0x9b, 0xbc, 0xdf, 0xf1]);

    #[test]
    fn header_round_trip() {
        let h = StreamHeader {
            cipher_id: CIPHER_DES_CBC,
            sub_frame_len: 320,
            frames_per_super: 8,
            superframe_count: 3,
            original_length: 7000,
        };
        assert_eq!(StreamHeader::parse(&h.to_bytes()).unwrap(), h);
        let mut bad = h.to_bytes();
        bad[4] = 0x02;
        assert!(matches!(StreamHeader::parse(&bad), Err(StreamError::BadHeader(_))));
        let mut bad = h.to_bytes();
        bad[6] = 0x41; // L = 321
        assert!(matches!(StreamHeader::parse(&bad), Err(StreamError::BadHeader(_))));
    }

    #[test]
    fn empty_signal() {
        let bytes = encrypt_stream(&PcmSignal::default(), &KEY, &ScrambleConfig::default());
        assert_eq!(bytes.len(), HEADER_LEN);
        let h = StreamHeader::parse(&bytes).unwrap();
        assert_eq!((h.superframe_count, h.original_length), (0, 0));
        assert!(decrypt_stream(&bytes, &KEY, InversionMode::Time).unwrap().is_empty());
    }

    #[test]
    fn one_superframe_layout() {
        let bytes = encrypt_stream(&tone(2560), &KEY, &ScrambleConfig::default());
        assert_eq!(bytes.len(), HEADER_LEN + 8 + 2 + 24 + 16 * 33);
        assert_eq!(&bytes[HEADER_LEN + 8..HEADER_LEN + 10], &[0, 24]);
        assert_eq!(bytes, encrypt_stream(&tone(2560), &KEY, &ScrambleConfig::default()));
    }

    #[test]
    fn length_preserved() {
        for len in [1, 159, 2560, 2561, 6000] {
            let x = tone(len);
            let bytes = encrypt_stream(&x, &KEY, &ScrambleConfig::default());
            assert_eq!(decrypt_stream(&bytes, &KEY, InversionMode::Time).unwrap().len(), len);
            let padded = len.div_ceil(2560) * 2560;
            assert_eq!(eavesdrop_stream(&bytes).unwrap().len(), padded);
        }
    }

    #[test]
    fn carried_tables_match_keystream_tables() {
        let config = ScrambleConfig::new(320, 12).unwrap();
        let bytes = encrypt_stream(&tone(20000), &KEY, &config);
        let (header, records) = parse_stream(&bytes).unwrap();
        let cipher = Des::new(&KEY);
        assert_eq!(records.len(), 6);
        for (s, record) in (0u32..).zip(&records) {
            assert_eq!(record.iv, cipher.encrypt_block(u64::from(s).to_be_bytes()));
            let carried = recover_table(&cipher, &header, record, s).unwrap();
            assert_eq!(carried, scrambler::generate_table(cipher.keystream(s), s, &config));
        }
    }

    #[test]
    fn identity_tables_make_eavesdrop_equal_decrypt() {
        let config = ScrambleConfig::default();
        let x = tone(5120);
        let bytes = encrypt_stream_with_tables(&x, &KEY, &config, |s| PermutationTable::identity(16, s));
        assert_eq!(
            eavesdrop_stream(&bytes).unwrap(),
            decrypt_stream(&bytes, &KEY, InversionMode::Time).unwrap()
        );
    }

    #[test]
    fn wrong_key_detected_or_garbled() {
        let x = tone(2560 * 4);
        let bytes = encrypt_stream(&x, &KEY, &ScrambleConfig::default());
        let mut wrong = *KEY.as_bytes();
        wrong[0] ^= 0x02;
        match decrypt_stream(&bytes, &DesKey::new(wrong), InversionMode::Time) {
            Err(StreamError::DecryptionFailed { .. }) => {}
            other => panic!("wrong key accepted: {other:?}"),
        }
    }

    #[test]
    fn malformed_streams() {
        let bytes = encrypt_stream(&tone(2560), &KEY, &ScrambleConfig::default());
        assert!(matches!(decrypt_stream(&bytes[..40], &KEY, InversionMode::Time), Err(StreamError::Truncated)));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(eavesdrop_stream(&extra), Err(StreamError::TrailingBytes(1))));
        let mut tampered = bytes.clone();
        tampered[HEADER_LEN + 10] ^= 0x01;
        assert!(matches!(
            decrypt_stream(&tampered, &KEY, InversionMode::Time),
            Err(StreamError::DecryptionFailed { superframe: 0, .. })
        ));
    }

    #[test]
    fn bit_errors_touch_only_payload() {
        let bytes = encrypt_stream(&tone(5120), &KEY, &ScrambleConfig::default());
        assert_eq!(inject_bit_errors(&bytes, 0.0, 9).unwrap(), bytes);
        let all = inject_bit_errors(&bytes, 1.0, 9).unwrap();
        let (_, records) = parse_stream(&bytes).unwrap();
        for r in &records {
            for (f, (orig, hit)) in r
                .frames
                .chunks_exact(33)
                .zip(all[r.frames_offset..r.frames_offset + r.frames.len()].chunks_exact(33))
                .enumerate()
            {
                assert_eq!(hit[0], orig[0] ^ 0x0f, "frame {f} first byte");
                assert!(orig[1..].iter().zip(&hit[1..]).all(|(&a, &b)| b == !a));
            }
        }
        let payload: usize = records.iter().map(|r| r.frames.len()).sum();
        let untouched = bytes.len() - payload;
        let same = bytes.iter().zip(&all).filter(|(a, b)| a == b).count();
        assert_eq!(same, untouched);
        assert_eq!(inject_bit_errors(&bytes, 0.01, 5).unwrap(), inject_bit_errors(&bytes, 0.01, 5).unwrap());
        assert_ne!(inject_bit_errors(&bytes, 0.01, 5).unwrap(), inject_bit_errors(&bytes, 0.01, 6).unwrap());
        assert!(inject_bit_errors(&bytes, 1.5, 0).is_err());
        // every corrupted stream still decodes
        decrypt_stream(&inject_bit_errors(&bytes, 0.05, 1).unwrap(), &KEY, InversionMode::Time).unwrap();
    }

    #[test]
    fn sign_inversion_round_trip() {
        let config = ScrambleConfig::default().with_inversion(InversionMode::Sign);
        let x = tone(2560 * 3);
        let bytes = encrypt_stream(&x, &KEY, &config);
        assert_eq!(decrypt_stream(&bytes, &KEY, InversionMode::Sign).unwrap().len(), x.len());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn decrypt_preserves_length(
            samples in proptest::collection::vec(any::<i16>(), 0..3000),
            l in prop::sample::select(vec![160usize, 320]),
            n in 1usize..6,
            key in any::<[u8; 8]>(),
        ) {
            let config = ScrambleConfig::new(l, n).unwrap();
            let x = PcmSignal::new(samples);
            let key = DesKey::new(key);
            let bytes = encrypt_stream(&x, &key, &config);
            let y = decrypt_stream(&bytes, &key, InversionMode::Time).unwrap();
            prop_assert_eq!(y.len(), x.len());
            let h = StreamHeader::parse(&bytes).unwrap();
            prop_assert_eq!(
                eavesdrop_stream(&bytes).unwrap().len(),
                h.superframe_count as usize * l * n
            );
        }
    }
}
