//! Regular-pulse excitation: weighting, 3:1 grid decimation, and APCM
//! quantization of the 13 selected pulses.

use super::arith::{abs, add, asl, asr, mult, mult_r, sub};

const H: [i32; 11] = [-134, -374, 0, 2054, 5741, 8192, 5741, 2054, 0, -374, -134];
const NRFAC: [i16; 8] = [29128, 26215, 23832, 21846, 20165, 18725, 17476, 16384];
const FAC: [i16; 8] = [18431, 20479, 22527, 24575, 26623, 28671, 30719, 32767];

/// Coded excitation of one sub-frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct RpeCode {
    pub grid: u8,
    pub xmaxc: u8,
    pub pulses: [u8; 13],
}

/// Block filter over `e`, which carries 5 zero samples either side.
fn weighting_filter(e: &[i16; 50]) -> [i16; 40] {
    let mut x = [0i16; 40];
    for (k, out) in x.iter_mut().enumerate() {
        let mut l_result: i32 = 4096;
        for (i, &h) in H.iter().enumerate() {
            l_result += i32::from(e[k + i]) * h;
        }
        *out = (l_result >> 13).clamp(i32::from(i16::MIN), i32::from(i16::MAX)) as i16;
    }
    x
}

/// Picks the decimation phase with the most energy.
fn grid_selection(x: &[i16; 40]) -> (u8, [i16; 13]) {
    let energy = |m: usize| -> i32 {
        (0..13)
            .map(|i| {
                let t = i32::from(x[m + 3 * i] >> 2);
                t * t
            })
            .sum::<i32>()
            << 1
    };
    let mut best = 0;
    let mut em = energy(0);
    for m in 1..4 {
        let e = energy(m);
        if e > em {
            best = m;
            em = e;
        }
    }
    let mut xm = [0i16; 13];
    for (i, v) in xm.iter_mut().enumerate() {
        *v = x[best + 3 * i];
    }
    (best as u8, xm)
}

/// Splits the block-maximum code into exponent and mantissa.
pub(crate) fn xmaxc_to_exp_mant(xmaxc: u8) -> (i16, i16) {
    let xmaxc = i16::from(xmaxc);
    let mut exp = 0i16;
    if xmaxc > 15 {
        exp = (xmaxc >> 3) - 1;
    }
    let mut mant = xmaxc - (exp << 3);
    if mant == 0 {
        exp = -4;
        mant = 7;
    } else {
        while mant <= 7 {
            mant = (mant << 1) | 1;
            exp -= 1;
        }
        mant -= 8;
    }
    (exp, mant)
}

fn apcm_quantize(xm: &[i16; 13]) -> (u8, [u8; 13], i16, i16) {
    let xmax = xm.iter().map(|&x| abs(x)).max().unwrap_or(0);

    let mut exp = 0i16;
    let mut temp = xmax >> 9;
    let mut itest = false;
    for _ in 0..=5 {
        itest |= temp <= 0;
        temp >>= 1;
        if !itest {
            exp += 1;
        }
    }
    let xmaxc = add(xmax >> (exp + 5), exp << 3);

    let (exp, mant) = xmaxc_to_exp_mant(xmaxc as u8);
    let shift = 6 - exp;
    let factor = NRFAC[mant as usize];
    let mut pulses = [0u8; 13];
    for (p, &x) in pulses.iter_mut().zip(xm) {
        let scaled = ((i32::from(x)) << shift) as i16;
        *p = ((mult(scaled, factor) >> 12) + 4) as u8;
    }
    (xmaxc as u8, pulses, exp, mant)
}

fn apcm_dequantize(pulses: &[u8; 13], exp: i16, mant: i16) -> [i16; 13] {
    let fac = FAC[mant as usize];
    let shift = sub(6, exp);
    let round = asl(1, sub(shift, 1));
    pulses.map(|c| {
        let temp = ((i16::from(c) << 1) - 7) << 12;
        asr(add(mult_r(fac, temp), round), shift)
    })
}

fn grid_positioning(grid: u8, xmp: &[i16; 13]) -> [i16; 40] {
    let mut ep = [0i16; 40];
    for (i, &v) in xmp.iter().enumerate() {
        ep[grid as usize + 3 * i] = v;
    }
    ep
}

/// Codes the LTP residual `e` (40 samples) and returns the code together
/// with the excitation the decoder will reconstruct from it.
pub(crate) fn encode(e: &[i16]) -> (RpeCode, [i16; 40]) {
    let mut padded = [0i16; 50];
    padded[5..45].copy_from_slice(e);
    let x = weighting_filter(&padded);
    let (grid, xm) = grid_selection(&x);
    let (xmaxc, pulses, exp, mant) = apcm_quantize(&xm);
    let xmp = apcm_dequantize(&pulses, exp, mant);
    (RpeCode { grid, xmaxc, pulses }, grid_positioning(grid, &xmp))
}

pub(crate) fn decode(code: &RpeCode) -> [i16; 40] {
    let (exp, mant) = xmaxc_to_exp_mant(code.xmaxc);
    let xmp = apcm_dequantize(&code.pulses, exp, mant);
    grid_positioning(code.grid, &xmp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_mant_split() {
        assert_eq!(xmaxc_to_exp_mant(0), (-4, 7));
        assert_eq!(xmaxc_to_exp_mant(1), (-3, 7));
        assert_eq!(xmaxc_to_exp_mant(2), (-2, 3));
        assert_eq!(xmaxc_to_exp_mant(15), (0, 7));
        assert_eq!(xmaxc_to_exp_mant(16), (1, 0));
        assert_eq!(xmaxc_to_exp_mant(63), (6, 7));
    }

    #[test]
    fn silence_codes_to_midpoint_pulses() {
        let (code, ep) = encode(&[0; 40]);
        assert_eq!(code.xmaxc, 0);
        assert_eq!(code.pulses, [4; 13]);
        // the smallest step still leaves a tiny reconstruction
        assert!(ep.iter().all(|&v| v.abs() <= 8));
    }

    #[test]
    fn pulse_codes_fit_three_bits() {
        let e: Vec<i16> = (0..40).map(|i| ((i * 7919) % 2001) as i16 - 1000).collect();
        let (code, ep) = encode(&e);
        assert!(code.pulses.iter().all(|&p| p < 8));
        assert!(code.xmaxc < 64 && code.grid < 4);
        assert_eq!(decode(&code), ep);
    }
}
