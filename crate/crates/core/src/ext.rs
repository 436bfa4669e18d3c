//! Extended-range nonnegative floats.
//!
//! Error masses shrink doubly exponentially along a trajectory: a height-20
//! tree routinely produces `L` around 2^-3000, far below f64's smallest
//! subnormal (2^-1074). `Ext` keeps a 53-bit mantissa and moves the binary
//! exponent into an `i64`, so those values stay exact enough to divide,
//! compare, and take base-2 logs of. For values inside f64's normal range the
//! arithmetic rounds identically to plain f64.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

/// Nonnegative binary float `m * 2^e` with `m == 0` or `0.5 <= m < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ext {
    m: f64,
    e: i64,
}

pub const ZERO: Ext = Ext { m: 0.0, e: 0 };
pub const ONE: Ext = Ext { m: 0.5, e: 1 };

/// Splits a positive finite f64 into `(m, e)` with `m in [0.5, 1)`.
fn frexp(x: f64) -> (f64, i64) {
    debug_assert!(x > 0.0 && x.is_finite());
    let bits = x.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    if raw_exp == 0 {
        // Subnormal: scale into the normal range first (exact).
        let (m, e) = frexp(x * 9007199254740992.0); // 2^53
        (m, e - 53)
    } else {
        let m = f64::from_bits((bits & 0x800f_ffff_ffff_ffff) | (1022u64 << 52));
        (m, raw_exp - 1022)
    }
}

/// `2^e` for `e` in the exactly-representable range [-1074, 1023].
fn pow2(e: i64) -> f64 {
    debug_assert!((-1074..=1023).contains(&e));
    if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else {
        // Subnormal powers of two: 2^e = 2^(e+52) * 2^-52, both factors exact.
        f64::from_bits(((e + 52 + 1023) as u64) << 52) * f64::from_bits(((-52 + 1023) as u64) << 52)
    }
}

impl Ext {
    pub const ZERO: Ext = ZERO;
    pub const ONE: Ext = ONE;

    /// Builds from any nonnegative finite f64.
    pub fn from_f64(x: f64) -> Ext {
        assert!(x >= 0.0 && x.is_finite(), "Ext requires a nonnegative finite value, got {x}");
        if x == 0.0 {
            ZERO
        } else {
            let (m, e) = frexp(x);
            Ext { m, e }
        }
    }

    fn norm(m: f64, e: i64) -> Ext {
        if m == 0.0 {
            ZERO
        } else {
            let (mm, de) = frexp(m);
            Ext { m: mm, e: e + de }
        }
    }

    pub fn is_zero(self) -> bool {
        self.m == 0.0
    }

    /// Nearest f64; collapses to 0 below the subnormal range and to infinity above it.
    pub fn to_f64(self) -> f64 {
        if self.m == 0.0 {
            0.0
        } else if self.e > 1024 {
            f64::INFINITY
        } else if self.e < -1021 {
            if self.e < -1074 + 52 {
                // Deep subnormal or below: round via a single scaled multiply.
                if self.e < -1075 {
                    return 0.0;
                }
                return self.m * pow2(-1022) * pow2(self.e + 1022);
            }
            self.m * pow2(-52) * pow2(self.e + 52)
        } else if self.e == 1024 {
            self.m * pow2(1023) * 2.0
        } else {
            self.m * pow2(self.e)
        }
    }

    /// Base-2 logarithm as f64 (`-inf` for zero).
    pub fn log2(self) -> f64 {
        if self.m == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.e as f64 + self.m.log2()
        }
    }

    pub fn sqrt(self) -> Ext {
        if self.m == 0.0 {
            return ZERO;
        }
        let half = self.e.div_euclid(2);
        let rem = self.e.rem_euclid(2);
        // value = (m * 2^rem) * 4^half, and m * 2^rem is in [0.5, 2).
        Ext::norm((self.m * pow2(rem)).sqrt(), half)
    }

    fn cmp_ext(&self, other: &Ext) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => (self.e, self.m)
                .partial_cmp(&(other.e, other.m))
                .expect("Ext mantissa is never NaN"),
        }
    }

    /// Decimal scientific notation with 17 significant digits, valid far
    /// outside f64's exponent range.
    pub fn sci17(self) -> String {
        if self.is_zero() {
            return sig17(0.0);
        }
        if (-1021..=1023).contains(&self.e) {
            return sig17(self.to_f64());
        }
        // log10(value) via a double-double product so the fractional part
        // keeps ~16 digits even for exponents in the thousands. LO is the
        // remainder of log10(2) after subtracting the f64 HI part.
        const L10_2_HI: f64 = std::f64::consts::LOG10_2;
        const L10_2_LO: f64 = -2.803_728_127_785_170_4e-18;
        let ef = self.e as f64;
        let hi = ef * L10_2_HI;
        let err = ef.mul_add(L10_2_HI, -hi) + ef * L10_2_LO;
        let total_hi = hi;
        let total_lo = err + self.m.log10();
        let mut d10 = (total_hi + total_lo).floor();
        let frac = (total_hi - d10) + total_lo;
        let mut mant = 10f64.powf(frac);
        if mant >= 10.0 {
            mant /= 10.0;
            d10 += 1.0;
        } else if mant < 1.0 {
            mant *= 10.0;
            d10 -= 1.0;
        }
        format!("{:.16}e{}", mant, d10 as i64)
    }
}

/// 17-significant-digit scientific form for an ordinary f64 (lossless round-trip).
pub fn sig17(x: f64) -> String {
    format!("{:.16e}", x)
}

impl From<f64> for Ext {
    fn from(x: f64) -> Ext {
        Ext::from_f64(x)
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Ext) -> Option<Ordering> {
        Some(self.cmp_ext(other))
    }
}

impl Add for Ext {
    type Output = Ext;
    fn add(self, rhs: Ext) -> Ext {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.cmp_ext(&rhs) == Ordering::Less { (rhs, self) } else { (self, rhs) };
        let d = hi.e - lo.e;
        if d > 1060 {
            return hi;
        }
        Ext::norm(hi.m + lo.m * pow2(-d), hi.e)
    }
}

impl Sub for Ext {
    type Output = Ext;
    /// Saturating at zero: every call site is a mathematically nonnegative
    /// difference, so a negative result can only be rounding noise.
    fn sub(self, rhs: Ext) -> Ext {
        if rhs.is_zero() {
            return self;
        }
        if self.cmp_ext(&rhs) != Ordering::Greater {
            return ZERO;
        }
        let d = self.e - rhs.e;
        if d > 1060 {
            return self;
        }
        let m = self.m - rhs.m * pow2(-d);
        if m <= 0.0 {
            ZERO
        } else {
            Ext::norm(m, self.e)
        }
    }
}

impl Mul for Ext {
    type Output = Ext;
    fn mul(self, rhs: Ext) -> Ext {
        if self.is_zero() || rhs.is_zero() {
            return ZERO;
        }
        Ext::norm(self.m * rhs.m, self.e + rhs.e)
    }
}

impl Div for Ext {
    type Output = Ext;
    fn div(self, rhs: Ext) -> Ext {
        assert!(!rhs.is_zero(), "Ext division by zero");
        if self.is_zero() {
            return ZERO;
        }
        Ext::norm(self.m / rhs.m, self.e - rhs.e)
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.sci17())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(x: f64) {
        assert_eq!(Ext::from_f64(x).to_f64(), x, "roundtrip failed for {x:e}");
    }

    #[test]
    fn roundtrips_across_the_f64_range() {
        for &x in &[0.0, 1.0, 0.5, 0.1, 1e-300, 1e300, 2.2250738585072014e-308, 5e-324, 4.9e-310]
        {
            roundtrip(x);
        }
    }

    #[test]
    fn arithmetic_matches_f64_in_range() {
        let cases = [(0.1, 0.2), (0.9801, 0.030146), (1.0, 3.0), (1e-8, 7.25)];
        for &(a, b) in &cases {
            let (ea, eb) = (Ext::from_f64(a), Ext::from_f64(b));
            assert_eq!((ea + eb).to_f64(), a + b);
            assert_eq!((ea * eb).to_f64(), a * b);
            assert_eq!((ea / eb).to_f64(), a / b);
            let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
            assert_eq!((Ext::from_f64(hi) - Ext::from_f64(lo)).to_f64(), hi - lo);
        }
    }

    #[test]
    fn survives_exponents_far_below_f64() {
        // Square 0.5 eleven times: 2^-2048, unrepresentable as f64.
        let mut x = Ext::from_f64(0.5);
        for _ in 0..11 {
            x = x * x;
        }
        assert_eq!(x.log2(), -2048.0);
        assert_eq!(x.to_f64(), 0.0);
        // Dividing two such values recovers an in-range ratio.
        let y = x * Ext::from_f64(8.0);
        assert_eq!((y / x).to_f64(), 8.0);
        assert!(x < y);
    }

    #[test]
    fn sqrt_halves_the_exponent() {
        let x = Ext::from_f64(0.25);
        assert_eq!(x.sqrt().to_f64(), 0.5);
        let mut tiny = Ext::from_f64(0.5);
        for _ in 0..10 {
            tiny = tiny * tiny;
        }
        assert_eq!(tiny.sqrt().log2(), -512.0);
        assert_eq!(Ext::from_f64(3.0e-7).sqrt().to_f64(), 3.0e-7_f64.sqrt());
    }

    #[test]
    fn subtraction_saturates_at_zero() {
        let a = Ext::from_f64(0.1);
        let b = Ext::from_f64(0.3);
        assert!((a - b).is_zero());
        assert_eq!((b - a).to_f64(), 0.3 - 0.1);
    }

    #[test]
    fn sci17_is_lossless_in_range_and_sane_beyond() {
        assert_eq!(Ext::from_f64(0.1).sci17(), sig17(0.1));
        let parsed: f64 = Ext::from_f64(0.30000000000000004).sci17().parse().unwrap();
        assert_eq!(parsed, 0.30000000000000004);
        // 2^-2048 = 3.0954...e-617
        let mut x = Ext::from_f64(0.5);
        for _ in 0..11 {
            x = x * x;
        }
        let s = x.sci17();
        assert!(s.ends_with("e-617"), "unexpected rendering {s}");
        assert!(s.starts_with("3.09"), "unexpected rendering {s}");
    }

    #[test]
    fn ordering_uses_the_full_exponent() {
        let small = Ext::norm(0.9, -5000);
        let tiny = Ext::norm(0.4, -5001);
        assert!(tiny < small);
        assert!(Ext::ZERO < tiny);
        assert_eq!(Ext::from_f64(1.0), Ext::ONE);
    }
}
