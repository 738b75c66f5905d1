//! 16/32-bit saturating fixed-point primitives of the full-rate codec.

pub(crate) const MIN_WORD: i16 = i16::MIN;
pub(crate) const MAX_WORD: i16 = i16::MAX;

#[inline]
pub(crate) fn saturate(x: i32) -> i16 {
    x.clamp(i32::from(MIN_WORD), i32::from(MAX_WORD)) as i16
}

#[inline]
pub(crate) fn add(a: i16, b: i16) -> i16 {
    saturate(i32::from(a) + i32::from(b))
}

#[inline]
pub(crate) fn sub(a: i16, b: i16) -> i16 {
    saturate(i32::from(a) - i32::from(b))
}

/// `a * b` in Q15, truncated.
#[inline]
pub(crate) fn mult(a: i16, b: i16) -> i16 {
    if a == MIN_WORD && b == MIN_WORD {
        MAX_WORD
    } else {
        ((i32::from(a) * i32::from(b)) >> 15) as i16
    }
}

/// `a * b` in Q15, rounded.
#[inline]
pub(crate) fn mult_r(a: i16, b: i16) -> i16 {
    if a == MIN_WORD && b == MIN_WORD {
        MAX_WORD
    } else {
        ((i32::from(a) * i32::from(b) + 16384) >> 15) as i16
    }
}

#[inline]
pub(crate) fn abs(a: i16) -> i16 {
    if a == MIN_WORD {
        MAX_WORD
    } else {
        a.abs()
    }
}

#[inline]
pub(crate) fn l_add(a: i32, b: i32) -> i32 {
    a.saturating_add(b)
}

/// Left shifts needed to normalize a non-zero 32-bit value.
#[inline]
pub(crate) fn norm(a: i32) -> i16 {
    debug_assert!(a != 0);
    let a = if a < 0 {
        if a <= -1_073_741_824 {
            return 0;
        }
        !a
    } else {
        a
    };
    (a.leading_zeros() as i16) - 1
}

pub(crate) fn asr(a: i16, n: i16) -> i16 {
    if n >= 16 {
        -i16::from(a < 0)
    } else if n <= -16 {
        0
    } else if n < 0 {
        ((i32::from(a)) << -n) as i16
    } else {
        a >> n
    }
}

pub(crate) fn asl(a: i16, n: i16) -> i16 {
    if n >= 16 {
        0
    } else if n <= -16 {
        -i16::from(a < 0)
    } else if n < 0 {
        asr(a, -n)
    } else {
        ((i32::from(a)) << n) as i16
    }
}

/// Fractional division `num / denum` in Q15 for `0 <= num <= denum`.
pub(crate) fn div(num: i16, denum: i16) -> i16 {
    debug_assert!(num >= 0 && denum >= num);
    if num == 0 {
        return 0;
    }
    let mut l_num = i32::from(num);
    let l_denum = i32::from(denum);
    let mut quotient = 0i16;
    for _ in 0..15 {
        quotient <<= 1;
        l_num <<= 1;
        if l_num >= l_denum {
            l_num -= l_denum;
            quotient += 1;
        }
    }
    quotient
}
