//! LPC analysis (autocorrelation, Schur recursion, log-area ratios and
//! their quantization) plus the decoder-side LAR reconstruction and
//! interpolation shared by both directions.

use super::arith::{abs, add, div, mult, mult_r, norm, sub, MIN_WORD, MAX_WORD};

/// Bit widths of the eight LAR codes.
pub const LAR_BITS: [u32; 8] = [6, 6, 5, 5, 4, 4, 3, 3];

// Quantizer constants per coefficient: slope A, offset B, code range
// [MIC, MAC], and the decoder's reciprocal slope INVA.
const QUANT_A: [i16; 8] = [20480, 20480, 20480, 20480, 13964, 15360, 8534, 9036];
const QUANT_B: [i16; 8] = [0, 0, 2048, -2560, 94, -1792, -341, -1144];
const QUANT_MIC: [i16; 8] = [-32, -32, -16, -16, -8, -8, -4, -4];
const QUANT_MAC: [i16; 8] = [31, 31, 15, 15, 7, 7, 3, 3];
const QUANT_INVA: [i16; 8] = [13107, 13107, 13107, 13107, 19223, 17476, 31454, 29708];

/// Nine-lag autocorrelation. `s` is rescaled in place (down then back up)
/// exactly as the reference arithmetic does; the lossy result is what the
/// short-term analysis filter later consumes.
pub(crate) fn autocorrelation(s: &mut [i16; 160]) -> [i32; 9] {
    let smax = s.iter().map(|&x| abs(x)).max().unwrap_or(0);
    let scalauto = if smax == 0 {
        0
    } else {
        4 - norm(i32::from(smax) << 16)
    };

    if scalauto > 0 {
        let factor = 16384 >> (scalauto - 1);
        for x in s.iter_mut() {
            *x = mult_r(*x, factor);
        }
    }

    let mut acf = [0i32; 9];
    for (k, slot) in acf.iter_mut().enumerate() {
        let mut sum = 0i32;
        for i in k..160 {
            sum += i32::from(s[i]) * i32::from(s[i - k]);
        }
        *slot = sum << 1;
    }

    if scalauto > 0 {
        for x in s.iter_mut() {
            *x = ((i32::from(*x)) << scalauto) as i16;
        }
    }
    acf
}

/// Schur recursion to eight Q15 reflection coefficients.
pub(crate) fn reflection_coefficients(l_acf: &[i32; 9]) -> [i16; 8] {
    let mut r = [0i16; 8];
    if l_acf[0] == 0 {
        return r;
    }
    let shift = norm(l_acf[0]);
    let mut acf = [0i16; 9];
    for (a, &l) in acf.iter_mut().zip(l_acf) {
        *a = ((l << shift) >> 16) as i16;
    }

    let mut k = [0i16; 9];
    let mut p = [0i16; 9];
    k[1..8].copy_from_slice(&acf[1..8]);
    p.copy_from_slice(&acf);

    for n in 1..=8 {
        let temp = abs(p[1]);
        if p[0] < temp {
            // remaining coefficients stay zero
            return r;
        }
        let mut rn = div(temp, p[0]);
        if p[1] > 0 {
            rn = -rn;
        }
        r[n - 1] = rn;
        if n == 8 {
            return r;
        }

        p[0] = add(p[0], mult_r(p[1], rn));
        for m in 1..=8 - n {
            p[m] = add(p[m + 1], mult_r(k[m], rn));
            k[m] = add(k[m], mult_r(p[m + 1], rn));
        }
    }
    r
}

/// Piecewise-linear approximation of the log-area ratio of each coefficient.
pub(crate) fn reflection_to_lar(r: &[i16; 8]) -> [i16; 8] {
    r.map(|ri| {
        let mut temp = abs(ri);
        if temp < 22118 {
            temp >>= 1;
        } else if temp < 31130 {
            temp -= 11059;
        } else {
            temp -= 26112;
            temp <<= 2;
        }
        if ri < 0 {
            -temp
        } else {
            temp
        }
    })
}

pub(crate) fn quantize_lars(lar: &[i16; 8]) -> [u8; 8] {
    let mut codes = [0u8; 8];
    for i in 0..8 {
        let mut temp = mult(QUANT_A[i], lar[i]);
        temp = add(temp, QUANT_B[i]);
        temp = add(temp, 256);
        temp >>= 9;
        let code = if temp > QUANT_MAC[i] {
            QUANT_MAC[i] - QUANT_MIC[i]
        } else if temp < QUANT_MIC[i] {
            0
        } else {
            temp - QUANT_MIC[i]
        };
        codes[i] = code as u8;
    }
    codes
}

/// LPC analysis of one preprocessed frame. `s` is left in the rescaled
/// state produced by [`autocorrelation`].
pub(crate) fn analyse(s: &mut [i16; 160]) -> [u8; 8] {
    let acf = autocorrelation(s);
    let r = reflection_coefficients(&acf);
    quantize_lars(&reflection_to_lar(&r))
}

/// Dequantized LARs (LAR'') from their codes.
pub(crate) fn decode_lars(codes: &[u8; 8]) -> [i16; 8] {
    let mut out = [0i16; 8];
    for i in 0..8 {
        let mut temp = add(i16::from(codes[i]), QUANT_MIC[i]) << 10;
        temp = sub(temp, QUANT_B[i] << 1);
        temp = mult_r(QUANT_INVA[i], temp);
        out[i] = add(temp, temp);
    }
    out
}

/// Which part of the 160-sample frame a coefficient set applies to.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Segment {
    /// samples 0..13
    Start,
    /// samples 13..27
    Early,
    /// samples 27..40
    Late,
    /// samples 40..160
    Steady,
}

impl Segment {
    pub(crate) const ALL: [(Segment, std::ops::Range<usize>); 4] = [
        (Segment::Start, 0..13),
        (Segment::Early, 13..27),
        (Segment::Late, 27..40),
        (Segment::Steady, 40..160),
    ];
}

/// Interpolates between the previous and current frame's LARs.
pub(crate) fn interpolate(prev: &[i16; 8], cur: &[i16; 8], seg: Segment) -> [i16; 8] {
    let mut out = [0i16; 8];
    for i in 0..8 {
        out[i] = match seg {
            Segment::Start => add(add(prev[i] >> 2, cur[i] >> 2), prev[i] >> 1),
            Segment::Early => add(prev[i] >> 1, cur[i] >> 1),
            Segment::Late => add(add(prev[i] >> 2, cur[i] >> 2), cur[i] >> 1),
            Segment::Steady => cur[i],
        };
    }
    out
}

/// Converts interpolated LARs back to reflection coefficients.
pub(crate) fn lar_to_reflection(larp: &[i16; 8]) -> [i16; 8] {
    larp.map(|x| {
        let mag = |temp: i16| {
            if temp < 11059 {
                temp << 1
            } else if temp < 20070 {
                temp + 11059
            } else {
                add(temp >> 2, 26112)
            }
        };
        if x < 0 {
            let temp = if x == MIN_WORD { MAX_WORD } else { -x };
            -mag(temp)
        } else {
            mag(x)
        }
    })
}
