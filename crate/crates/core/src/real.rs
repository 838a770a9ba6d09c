//! A small abstraction over the scalar type so that the special-function
//! and quadrature kernels can run in either `f64` or double-double.

use crate::dd::Dd;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Real:
    Copy
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Relative machine epsilon of the representation.
    const EPS: f64;
    /// Argument above which the Bessel evaluator switches from the power
    /// series to the large-argument expansion. Chosen so that the series
    /// cancellation stays within the headroom of the representation.
    const BESSEL_SWITCH: f64;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn ln(self) -> Self;
    fn exp(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn pi() -> Self;
    /// ln Gamma for positive arguments.
    fn lgamma(self) -> Self;
}

impl Real for f64 {
    const EPS: f64 = f64::EPSILON;
    const BESSEL_SWITCH: f64 = 14.0;

    #[inline]
    fn from_f64(x: f64) -> f64 {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    #[inline]
    fn sqrt(self) -> f64 {
        f64::sqrt(self)
    }
    #[inline]
    fn ln(self) -> f64 {
        f64::ln(self)
    }
    #[inline]
    fn exp(self) -> f64 {
        f64::exp(self)
    }
    #[inline]
    fn sin_cos(self) -> (f64, f64) {
        f64::sin_cos(self)
    }
    fn pi() -> f64 {
        std::f64::consts::PI
    }
    fn lgamma(self) -> f64 {
        lgamma_lanczos(self)
    }
}

impl Real for Dd {
    const EPS: f64 = Dd::EPSILON;
    const BESSEL_SWITCH: f64 = 30.0;

    #[inline]
    fn from_f64(x: f64) -> Dd {
        Dd::from_f64(x)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }
    #[inline]
    fn abs(self) -> Dd {
        Dd::abs(self)
    }
    #[inline]
    fn sqrt(self) -> Dd {
        Dd::sqrt(self)
    }
    #[inline]
    fn ln(self) -> Dd {
        Dd::ln(self)
    }
    #[inline]
    fn exp(self) -> Dd {
        Dd::exp(self)
    }
    #[inline]
    fn sin_cos(self) -> (Dd, Dd) {
        Dd::sin_cos(self)
    }
    fn pi() -> Dd {
        Dd::PI
    }
    fn lgamma(self) -> Dd {
        lgamma_stirling_dd(self)
    }
}

/// Lanczos approximation (g = 7, 9 coefficients), ~1e-15 relative.
pub fn lgamma_lanczos(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    assert!(x > 0.0, "lgamma requires a positive argument");
    if x < 0.5 {
        // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - lgamma_lanczos(1.0 - x);
    }
    let z = x - 1.0;
    let mut a = C[0];
    for (i, &c) in C.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + a.ln()
}

/// Stirling series with upward recurrence, ~1e-31 relative for x > 0.
fn lgamma_stirling_dd(x: Dd) -> Dd {
    assert!(x.hi > 0.0, "lgamma requires a positive argument");
    // B_{2n}/(2n(2n-1)) for n = 1..13
    const COEF: [(f64, f64); 13] = [
        (1.0, 12.0),
        (-1.0, 360.0),
        (1.0, 1260.0),
        (-1.0, 1680.0),
        (1.0, 1188.0),
        (-691.0, 360360.0),
        (1.0, 156.0),
        (-3617.0, 122400.0),
        (43867.0, 244188.0),
        (-174611.0, 125400.0),
        (77683.0, 5796.0),
        (-236364091.0, 1506960.0),
        (657931.0, 300.0),
    ];
    let mut shift = Dd::ZERO;
    let mut z = x;
    while z.hi < 70.0 {
        shift = shift + z.ln();
        z = z + Dd::ONE;
    }
    let half = Dd::from_f64(0.5);
    let mut s = (z - half) * z.ln() - z + half * (Dd::TWO_PI).ln();
    let z2 = z.sqr();
    let mut zp = z;
    for &(num, den) in &COEF {
        s = s + Dd::from_f64(num) / (Dd::from_f64(den) * zp);
        zp = zp * z2;
    }
    s - shift
}
