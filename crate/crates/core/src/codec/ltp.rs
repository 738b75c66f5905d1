//! Long-term (pitch) prediction.

use super::arith::{abs, add, mult, mult_r, norm, sub};

pub const MIN_LAG: i16 = 40;
pub const MAX_LAG: i16 = 120;

/// Gain decision thresholds.
const DLB: [i16; 4] = [6554, 16384, 26214, 32767];
/// Quantized gain levels.
pub(crate) const QLB: [i16; 4] = [3277, 11469, 21299, 32767];

/// Lag and gain code for one 40-sample sub-frame.
///
/// `dp` is the reconstructed residual with 120 samples of history before
/// `cur`; `d` is the current short-term residual.
pub(crate) fn parameters(d: &[i16], dp: &[i16], cur: usize) -> (i16, u8) {
    let dmax = d.iter().map(|&x| abs(x)).max().unwrap_or(0);
    let temp = if dmax == 0 {
        0
    } else {
        norm(i32::from(dmax) << 16)
    };
    let scal = if temp > 6 { 0 } else { 6 - temp };

    let mut wt = [0i16; 40];
    for (w, &x) in wt.iter_mut().zip(d) {
        *w = x >> scal;
    }

    let mut l_max = 0i32;
    let mut nc = MIN_LAG;
    for lambda in MIN_LAG..=MAX_LAG {
        let base = cur - lambda as usize;
        let l_result: i32 = wt
            .iter()
            .zip(&dp[base..base + 40])
            .map(|(&w, &p)| i32::from(w) * i32::from(p))
            .sum();
        if l_result > l_max {
            nc = lambda;
            l_max = l_result;
        }
    }

    l_max <<= 1;
    l_max >>= 6 - scal;

    let base = cur - nc as usize;
    let mut l_power = 0i32;
    for &p in &dp[base..base + 40] {
        let t = i32::from(p >> 3);
        l_power += t * t;
    }
    l_power <<= 1;

    if l_max <= 0 {
        return (nc, 0);
    }
    if l_max >= l_power {
        return (nc, 3);
    }

    let shift = norm(l_power);
    let r = ((l_max << shift) >> 16) as i16;
    let s = ((l_power << shift) >> 16) as i16;
    let bc = DLB[..3].iter().position(|&dlb| r <= mult(s, dlb)).unwrap_or(3);
    (nc, bc as u8)
}

/// Subtracts the pitch estimate from `d`. Writes the estimate into
/// `dp[cur..cur + 40]` and the LTP residual into `e`.
pub(crate) fn analysis_filter(bc: u8, nc: i16, dp: &mut [i16], cur: usize, d: &[i16], e: &mut [i16]) {
    let gain = QLB[bc as usize];
    let lag = nc as usize;
    for k in 0..40 {
        let est = mult_r(gain, dp[cur + k - lag]);
        dp[cur + k] = est;
        e[k] = sub(d[k], est);
    }
}

/// Decoder-side pitch synthesis. `drp` holds 120 history samples followed
/// by 40 output samples; history is shifted along afterwards. An invalid
/// lag falls back to the previous one.
pub(crate) fn synthesis_filter(nrp: &mut i16, ncr: u8, bcr: u8, erp: &[i16; 40], drp: &mut [i16; 160]) {
    let ncr = i16::from(ncr);
    let nr = if (MIN_LAG..=MAX_LAG).contains(&ncr) { ncr } else { *nrp };
    *nrp = nr;
    let gain = QLB[bcr as usize];
    let lag = nr as usize;
    for k in 0..40 {
        let drpp = mult_r(gain, drp[120 + k - lag]);
        drp[120 + k] = add(erp[k], drpp);
    }
    drp.copy_within(40..160, 0);
}
