//! Scalar abstraction for distances.
//!
//! Every algorithm in the crate is written against [`Scalar`], so the same
//! tree, traversal and search code runs on `f32`, `f64` or exact
//! [`BigRational`] distances. Cover tree conditions compare distances against
//! powers of two, so a scalar must be able to produce `2^e` exactly.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A totally ordered (on the values we admit) distance type.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Exact `2^exp`.
    fn pow2(exp: i32) -> Self;

    fn halve(&self) -> Self;

    fn to_f64(&self) -> f64;

    /// Converts a finite float; `None` for NaN or infinities.
    fn from_f64(x: f64) -> Option<Self>;

    /// Text form used in distance-matrix files; round-trips through
    /// [`Scalar::parse_text`].
    fn to_text(&self) -> String {
        format_sig17(self.to_f64())
    }

    fn parse_text(s: &str) -> Option<Self> {
        s.trim().parse::<f64>().ok().and_then(Self::from_f64)
    }

    /// Total comparison. Panics on NaN, which never passes ingestion.
    #[inline]
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).expect("NaN distance")
    }
}

impl Scalar for f64 {
    #[inline]
    fn pow2(exp: i32) -> Self {
        2f64.powi(exp)
    }

    #[inline]
    fn halve(&self) -> Self {
        self * 0.5
    }

    #[inline]
    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
}

impl Scalar for f32 {
    #[inline]
    fn pow2(exp: i32) -> Self {
        2f32.powi(exp)
    }

    #[inline]
    fn halve(&self) -> Self {
        self * 0.5
    }

    #[inline]
    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn from_f64(x: f64) -> Option<Self> {
        let y = x as f32;
        y.is_finite().then_some(y)
    }
}

impl Scalar for BigRational {
    fn pow2(exp: i32) -> Self {
        let mag = BigInt::one() << exp.unsigned_abs();
        if exp >= 0 {
            BigRational::from_integer(mag)
        } else {
            BigRational::new(BigInt::one(), mag)
        }
    }

    fn halve(&self) -> Self {
        self / BigRational::from_integer(BigInt::from(2))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(if self.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        })
    }

    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    /// Exact `a` or `a/b`.
    fn to_text(&self) -> String {
        self.to_string()
    }

    /// Accepts `a`, `a/b` or a decimal float.
    fn parse_text(s: &str) -> Option<Self> {
        let s = s.trim();
        s.parse::<BigRational>()
            .ok()
            .or_else(|| s.parse::<f64>().ok().and_then(BigRational::from_float))
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

/// Smallest integer `e` with `d <= 2^e`. `d` must be positive.
pub fn ceil_log2<T: Scalar>(d: &T) -> i32 {
    debug_assert!(*d > T::zero());
    let approx = d.to_f64().log2();
    let mut e = if approx.is_finite() {
        approx.ceil().clamp(-1000.0, 1000.0) as i32
    } else {
        0
    };
    while *d > T::pow2(e) {
        e += 1;
    }
    while *d <= T::pow2(e - 1) {
        e -= 1;
    }
    e
}

/// Formats a float with 17 significant digits, decimal point, no locale.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 {
        return "0.0000000000000000".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}
