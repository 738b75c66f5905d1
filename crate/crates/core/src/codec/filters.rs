//! Sample-rate filters: input conditioning, the short-term (LPC) lattice
//! filters, and output de-emphasis.

use super::arith::{add, l_add, mult_r, sub};

/// Offset-compensation and pre-emphasis memory.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct PreprocessState {
    z1: i16,
    l_z2: i32,
    mp: i16,
}

impl PreprocessState {
    /// Downscale to 13 bits, remove DC with a first-order high-pass, then
    /// pre-emphasise with coefficient 28180/32768.
    pub(crate) fn run(&mut self, input: &[i16; 160]) -> [i16; 160] {
        let mut out = [0i16; 160];
        for (o, &s) in out.iter_mut().zip(input) {
            let so = (s >> 3) << 2;

            let s1 = so - self.z1;
            self.z1 = so;

            let mut l_s2 = i32::from(s1) << 15;
            let msp = (self.l_z2 >> 15) as i16;
            let lsp = (self.l_z2 - (i32::from(msp) << 15)) as i16;
            l_s2 += i32::from(mult_r(lsp, 32735));
            self.l_z2 = l_add(i32::from(msp) * 32735, l_s2);

            let l_temp = l_add(self.l_z2, 16384);
            let emph = mult_r(self.mp, -28180);
            self.mp = (l_temp >> 15) as i16;
            *o = add(self.mp, emph);
        }
        out
    }
}

/// Lattice analysis filter over `s` in place. `u` is the filter memory.
pub(crate) fn short_term_analysis(u: &mut [i16; 8], rp: &[i16; 8], s: &mut [i16]) {
    for x in s.iter_mut() {
        let mut di = *x;
        let mut sav = di;
        for i in 0..8 {
            let ui = u[i];
            let rpi = rp[i];
            u[i] = sav;
            sav = add(ui, mult_r(rpi, di));
            di = add(di, mult_r(rpi, ui));
        }
        *x = di;
    }
}

/// Lattice synthesis filter from residual `wt` into `sr`. `v` is the memory.
pub(crate) fn short_term_synthesis(v: &mut [i16; 9], rrp: &[i16; 8], wt: &[i16], sr: &mut [i16]) {
    for (out, &w) in sr.iter_mut().zip(wt) {
        let mut sri = w;
        for i in (0..8).rev() {
            sri = sub(sri, mult_r(rrp[i], v[i]));
            v[i + 1] = add(v[i], mult_r(rrp[i], sri));
        }
        v[0] = sri;
        *out = sri;
    }
}

/// De-emphasis, then upscaling back to 16 bits with the three low bits cleared.
pub(crate) fn postprocess(msr: &mut i16, s: &mut [i16; 160]) {
    for x in s.iter_mut() {
        let tmp = mult_r(*msr, 28180);
        *msr = add(*x, tmp);
        *x = add(*msr, *msr) & !7;
    }
}
