//! Double-double arithmetic: an unevaluated sum of two `f64` values giving
//! roughly 31 significant decimal digits.
//!
//! The kernel matrices assembled by the determinant solver have leading
//! eigenvalues within ~1e-15 of 1 for large intervals, which puts the log
//! determinant out of reach of plain `f64`. Carrying the quadrature nodes,
//! kernel entries and factorization in double-double keeps the noise floor
//! near 1e-30 without pulling in a bignum dependency.
//!
//! The error-free transformations are the classical ones of Dekker and
//! Knuth; `two_prod` relies on the correctly rounded `f64::mul_add`.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A double-double number `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| >= |b|
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    /// pi to double-double precision.
    pub const PI: Dd = Dd {
        hi: 3.141592653589793116e0,
        lo: 1.224646799147353207e-16,
    };
    /// 2*pi.
    pub const TWO_PI: Dd = Dd {
        hi: 6.283185307179586232e0,
        lo: 2.449293598294706414e-16,
    };
    /// pi/2.
    pub const FRAC_PI_2: Dd = Dd {
        hi: 1.570796326794896558e0,
        lo: 6.123233995736766036e-17,
    };
    /// ln 2.
    pub const LN2: Dd = Dd {
        hi: 6.931471805599452862e-1,
        lo: 2.319046813846299558e-17,
    };
    /// Relative accuracy of a double-double value.
    pub const EPSILON: f64 = 1.23e-32;

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn is_sign_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    /// Splits into integer and fractional parts; the integer part is exact.
    pub fn floor(self) -> Dd {
        let fhi = self.hi.floor();
        if fhi == self.hi {
            let flo = self.lo.floor();
            let (s, e) = quick_two_sum(fhi, flo);
            Dd { hi: s, lo: e }
        } else {
            Dd { hi: fhi, lo: 0.0 }
        }
    }

    pub fn sqr(self) -> Dd {
        let (p, mut e) = two_prod(self.hi, self.hi);
        e += 2.0 * self.hi * self.lo;
        e += self.lo * self.lo;
        let (s, err) = quick_two_sum(p, e);
        Dd { hi: s, lo: err }
    }

    pub fn sqrt(self) -> Dd {
        // One Newton step on 1/sqrt from the f64 seed doubles its accuracy.
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ZERO;
        }
        debug_assert!(self.hi > 0.0, "sqrt of negative double-double");
        let x = 1.0 / self.hi.sqrt();
        let ax = Dd::from_f64(self.hi.sqrt());
        let err = self - ax.sqr();
        ax + Dd::from_f64(err.hi * (x * 0.5))
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn powi(self, n: i32) -> Dd {
        match n.cmp(&0) {
            Ordering::Equal => Dd::ONE,
            Ordering::Less => (Dd::ONE / self).powi(-n),
            Ordering::Greater => {
                let mut acc = Dd::ONE;
                let mut base = self;
                let mut k = n;
                while k > 0 {
                    if k & 1 == 1 {
                        acc = acc * base;
                    }
                    base = base.sqr();
                    k >>= 1;
                }
                acc
            }
        }
    }

    /// exp(x) via `exp(k ln2 + r) = 2^k exp(r)` with a Taylor series for `r`.
    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -709.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = self - Dd::LN2 * Dd::from_f64(k);
        // |r| <= ln2/2; 26 terms reach ~1e-35
        let mut sum = Dd::ONE + r;
        let mut term = r;
        for i in 2..=26 {
            term = term * r / Dd::from_f64(i as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-35 * sum.hi.abs() {
                break;
            }
        }
        let scale = f64::powi(2.0, k as i32);
        Dd {
            hi: sum.hi * scale,
            lo: sum.lo * scale,
        }
    }

    /// Natural log by Newton iteration on `exp(y) = x` from the f64 seed.
    pub fn ln(self) -> Dd {
        debug_assert!(self.hi > 0.0, "ln of non-positive double-double");
        let mut y = Dd::from_f64(self.hi.ln());
        // two iterations: y <- y + x*exp(-y) - 1
        for _ in 0..2 {
            y = y + self * (-y).exp() - Dd::ONE;
        }
        y
    }

    /// Simultaneous sin and cos with argument reduction modulo 2*pi.
    ///
    /// Accurate for |x| up to ~1e8; reduction uses the double-double value
    /// of 2*pi, losing roughly one digit per factor of ten in |x|.
    pub fn sin_cos(self) -> (Dd, Dd) {
        // reduce to t in [-pi/4, pi/4] with quadrant index q
        let n = (self.to_f64() / std::f64::consts::FRAC_PI_2).round();
        let t = self - Dd::FRAC_PI_2 * Dd::from_f64(n);
        let q = ((n as i64) % 4 + 4) % 4;
        let (s, c) = sin_cos_taylor(t);
        match q {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

fn sin_cos_taylor(x: Dd) -> (Dd, Dd) {
    let x2 = x.sqr();
    let mut s = x;
    let mut term = x;
    let mut k = 1.0;
    loop {
        term = term * x2 / Dd::from_f64(-((k + 1.0) * (k + 2.0)));
        s = s + term;
        k += 2.0;
        if term.hi.abs() < 1e-36 || k > 40.0 {
            break;
        }
    }
    let mut c = Dd::ONE;
    term = Dd::ONE;
    k = 0.0;
    loop {
        term = term * x2 / Dd::from_f64(-((k + 1.0) * (k + 2.0)));
        c = c + term;
        k += 2.0;
        if term.hi.abs() < 1e-36 || k > 40.0 {
            break;
        }
    }
    (s, c)
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let e = e + self.lo + rhs.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p, mut e) = two_prod(self.hi, rhs.hi);
        e += self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Dd::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Dd::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

impl PartialEq for Dd {
    fn eq(&self, other: &Dd) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_mul_roundtrip() {
        let a = Dd::from_f64(1.0) / Dd::from_f64(3.0);
        let b = a * Dd::from_f64(3.0) - Dd::ONE;
        assert!(b.to_f64().abs() < 1e-31);
    }

    #[test]
    fn sqrt_of_two() {
        let s = Dd::from_f64(2.0).sqrt();
        let r = s.sqr() - Dd::from_f64(2.0);
        assert!(r.to_f64().abs() < 1e-30);
    }

    #[test]
    fn exp_ln_inverse() {
        for &x in &[0.3, 1.0, 4.7, 25.0, -3.2] {
            let d = Dd::from_f64(x);
            let y = d.exp().ln() - d;
            assert!(y.to_f64().abs() < 1e-29, "x={x}: resid {}", y.to_f64());
        }
    }

    #[test]
    fn ln_matches_f64() {
        let v = Dd::from_f64(123.456).ln();
        assert!((v.to_f64() - 123.456_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn sin_cos_pythagoras() {
        for &x in &[0.1, 1.5, 7.3, 100.0, 1234.5] {
            let (s, c) = Dd::from_f64(x).sin_cos();
            let r = s.sqr() + c.sqr() - Dd::ONE;
            assert!(r.to_f64().abs() < 1e-28, "x={x}");
            assert!((s.to_f64() - x.sin()).abs() < 1e-13);
            assert!((c.to_f64() - x.cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn division_accuracy() {
        let x = Dd::from_f64(355.0) / Dd::from_f64(113.0);
        let back = x * Dd::from_f64(113.0) - Dd::from_f64(355.0);
        assert!(back.to_f64().abs() < 1e-28);
    }

    #[test]
    fn floor_exact() {
        assert_eq!(Dd::from_f64(2.75).floor().to_f64(), 2.0);
        assert_eq!(Dd::from_f64(-2.25).floor().to_f64(), -3.0);
    }
}
