//! Extended-precision real numbers.
//!
//! [`Scalar`] wraps an `astro_float::BigFloat` together with the precision (in
//! bits) it was produced at. Binary operations run at the larger of the two
//! operand precisions and always round to nearest-even, so results are a
//! deterministic function of the inputs and their precisions.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

/// Default working precision in bits.
pub const DEFAULT_PRECISION: usize = 512;
/// Smallest precision accepted anywhere in the crate.
pub const MIN_PRECISION: usize = 128;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Clamp a requested precision to the supported range.
pub fn clamp_precision(bits: usize) -> usize {
    bits.max(MIN_PRECISION)
}

#[derive(Clone)]
pub struct Scalar {
    value: BigFloat,
    precision: usize,
}

impl Scalar {
    fn wrap(value: BigFloat, precision: usize) -> Self {
        debug_assert!(!value.is_nan(), "Scalar operation produced NaN");
        Scalar { value, precision }
    }

    pub fn zero(precision: usize) -> Self {
        let p = clamp_precision(precision);
        Self::wrap(BigFloat::from_word(0, p), p)
    }

    pub fn one(precision: usize) -> Self {
        let p = clamp_precision(precision);
        Self::wrap(BigFloat::from_word(1, p), p)
    }

    pub fn from_f64(x: f64, precision: usize) -> Self {
        assert!(x.is_finite(), "Scalar::from_f64 requires a finite value, got {x}");
        let p = clamp_precision(precision);
        Self::wrap(BigFloat::from_f64(x, p), p)
    }

    pub fn from_i64(x: i64, precision: usize) -> Self {
        let p = clamp_precision(precision);
        Self::wrap(BigFloat::from_i64(x, p), p)
    }

    pub fn from_u64(x: u64, precision: usize) -> Self {
        let p = clamp_precision(precision);
        Self::wrap(BigFloat::from_u64(x, p), p)
    }

    /// `num / den` rounded at `precision`.
    pub fn from_ratio(num: i64, den: i64, precision: usize) -> Self {
        Self::from_i64(num, precision) / &Self::from_i64(den, precision)
    }

    pub fn pi(precision: usize) -> Self {
        let p = clamp_precision(precision);
        Self::wrap(with_consts(|cc| cc.pi(p, RM)), p)
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    /// The same value re-rounded to `precision` bits.
    pub fn with_precision(&self, precision: usize) -> Self {
        let p = clamp_precision(precision);
        let mut v = self.value.clone();
        v.set_precision(p, RM).expect("precision change");
        Self::wrap(v, p)
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.value.is_zero() && self.value.is_negative()
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.value.abs(), self.precision)
    }

    pub fn sqrt(&self) -> Self {
        Self::wrap(self.value.sqrt(self.precision, RM), self.precision)
    }

    pub fn exp(&self) -> Self {
        let p = self.precision;
        Self::wrap(with_consts(|cc| self.value.exp(p, RM, cc)), p)
    }

    pub fn ln(&self) -> Self {
        let p = self.precision;
        Self::wrap(with_consts(|cc| self.value.ln(p, RM, cc)), p)
    }

    pub fn powi(&self, n: usize) -> Self {
        if n == 0 {
            return Self::one(self.precision);
        }
        Self::wrap(self.value.powi(n, self.precision, RM), self.precision)
    }

    pub fn mul_f64(&self, x: f64) -> Self {
        self * &Scalar::from_f64(x, self.precision)
    }

    /// Nearest double. Values beyond the double range map to ±inf and values
    /// below it map to ±0.
    pub fn to_f64(&self) -> f64 {
        match self.value.as_raw_parts() {
            None => f64::NAN,
            Some((words, _, sign, exponent, _)) => {
                let top = match words.last() {
                    Some(&w) if w != 0 => w,
                    _ => return 0.0,
                };
                // Mantissa is normalized: value = 0.top... * 2^exponent.
                let mag = scale_by_pow2(top as f64, exponent as i64 - 64);
                if sign == Sign::Neg {
                    -mag
                } else {
                    mag
                }
            }
        }
    }

    /// Binary exponent `e` with `|self| ∈ [2^(e-1), 2^e)`, or `None` for zero.
    pub fn exponent(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            self.value.exponent().map(i64::from)
        }
    }

    pub fn max(a: &Scalar, b: &Scalar) -> Scalar {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn inner(&self) -> &BigFloat {
        &self.value
    }
}

fn scale_by_pow2(x: f64, e: i64) -> f64 {
    if e > 2100 {
        return f64::INFINITY;
    }
    if e < -2200 {
        return 0.0;
    }
    let mut v = x;
    let mut e = e;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e as i32)
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({:e} @{}b)", self.to_f64(), self.precision)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.cmp(&other.value).map(|c| c.cmp(&0))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                let p = self.precision.max(rhs.precision);
                Scalar::wrap(self.value.$method(&rhs.value, p, RM), p)
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::wrap(self.value.clone().neg(), self.precision)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_doubles() {
        for &x in &[0.0, 1.0, -2.5, 1e-300, std::f64::consts::PI, -7e250] {
            assert_eq!(Scalar::from_f64(x, 256).to_f64(), x);
        }
    }

    #[test]
    fn arithmetic_beyond_double_precision() {
        let p = 512;
        let third = Scalar::from_ratio(1, 3, p);
        let back = &third * &Scalar::from_i64(3, p);
        let err = (&back - &Scalar::one(p)).abs();
        assert!(err.exponent().is_none_or(|e| e < -500));
    }

    #[test]
    fn huge_values_stay_representable() {
        let big = Scalar::from_i64(10, 256).powi(400);
        assert_eq!(big.to_f64(), f64::INFINITY);
        let ratio = &big / &Scalar::from_i64(10, 256).powi(399);
        assert!((ratio.to_f64() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn transcendental_sanity() {
        let p = 256;
        let e = Scalar::one(p).exp();
        assert!((e.to_f64() - std::f64::consts::E).abs() < 1e-15);
        assert!((e.ln().to_f64() - 1.0).abs() < 1e-15);
        assert!((Scalar::pi(p).to_f64() - std::f64::consts::PI).abs() < 1e-15);
        assert!((Scalar::from_i64(2, p).sqrt().to_f64() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ordering() {
        let a = Scalar::from_f64(-1.0, 128);
        let b = Scalar::from_f64(2.0, 256);
        assert!(a < b);
        assert!(a.is_negative());
        assert_eq!(Scalar::max(&a, &b), b);
        assert!(!Scalar::zero(128).is_negative());
    }
}
