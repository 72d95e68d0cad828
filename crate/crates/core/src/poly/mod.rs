//! Dense univariate polynomials over [`Scalar`] plus the Chebyshev and
//! Hermite families and exact Gaussian moments.

mod bases;
mod moments;
mod multi_index;

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::scalar::Scalar;

pub use bases::{chebyshev, chebyshev_over_x, hermite_normalized, hermite_normalized_f64};
pub use moments::{gaussian_expectation, gaussian_moment, gaussian_moments};
pub use multi_index::{enumerate_multi_indices, hermite_tensor_eval, multi_index_count, MultiIndex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("degree {requested} exceeds the configured degree cap {cap}")]
    DegreeCap { requested: usize, cap: usize },
    #[error("{count} multi-indices exceed the matrix-dimension cap {cap}")]
    MatrixDimCap { count: usize, cap: usize },
    #[error("chebyshev_over_x needs an odd degree, got {0}")]
    EvenChebyshev(usize),
    #[error("length mismatch: multi-index has {expected} entries, point has {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("power exponent must be at least 1")]
    ZeroPower,
}

/// Products above this many coefficient pairs are split across threads.
const PAR_MUL_THRESHOLD: usize = 4096;

/// Monomial-basis polynomial. `coeffs[i]` multiplies `x^i`.
#[derive(Clone)]
pub struct Polynomial {
    coeffs: Vec<Scalar>,
}

impl Polynomial {
    /// Builds a polynomial and trims trailing zero coefficients.
    pub fn new(coeffs: Vec<Scalar>, precision: usize) -> Self {
        let mut p = Polynomial { coeffs };
        p.normalize(precision);
        p
    }

    pub fn from_f64(coeffs: &[f64], precision: usize) -> Self {
        Self::new(coeffs.iter().map(|&c| Scalar::from_f64(c, precision)).collect(), precision)
    }

    pub fn zero(precision: usize) -> Self {
        Polynomial { coeffs: vec![Scalar::zero(precision)] }
    }

    pub fn constant(c: Scalar) -> Self {
        let p = c.precision();
        Self::new(vec![c], p)
    }

    /// `c * x^n`.
    pub fn monomial(c: Scalar, n: usize) -> Self {
        let p = c.precision();
        let mut coeffs = vec![Scalar::zero(p); n + 1];
        coeffs[n] = c;
        Self::new(coeffs, p)
    }

    fn normalize(&mut self, precision: usize) {
        while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(Scalar::is_zero) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(Scalar::zero(precision));
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Option<&Scalar> {
        self.coeffs.get(i)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    /// Largest coefficient precision.
    pub fn precision(&self) -> usize {
        self.coeffs.iter().map(Scalar::precision).max().unwrap_or(0)
    }

    /// Horner evaluation at the larger of the polynomial and point precisions.
    pub fn eval(&self, x: &Scalar) -> Scalar {
        let mut acc = self.coeffs[self.degree()].clone();
        for c in self.coeffs[..self.degree()].iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn eval_f64_point(&self, x: f64) -> Scalar {
        self.eval(&Scalar::from_f64(x, self.precision()))
    }

    /// Double-precision Horner. Plotting aid only: at large degrees the
    /// monomial coefficients cancel far beyond what a double can hold, so
    /// nothing certified ever goes through here.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64())
    }

    pub fn scale(&self, s: &Scalar) -> Polynomial {
        let p = self.precision().max(s.precision());
        Self::new(self.coeffs.iter().map(|c| c * s).collect(), p)
    }

    pub fn add_constant(&self, c: &Scalar) -> Polynomial {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] = &coeffs[0] + c;
        Self::new(coeffs, self.precision())
    }

    /// The polynomial with the same coefficients rounded to `precision`.
    pub fn with_precision(&self, precision: usize) -> Polynomial {
        Self::new(self.coeffs.iter().map(|c| c.with_precision(precision)).collect(), precision)
    }

    pub fn derivative(&self) -> Polynomial {
        let p = self.precision();
        if self.degree() == 0 {
            return Polynomial::zero(p);
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| c * &Scalar::from_u64(i as u64 + 1, p))
            .collect();
        Self::new(coeffs, p)
    }

    /// The antiderivative `P` with `P' = self` and `P(0) = 0`.
    pub fn antiderivative(&self) -> Polynomial {
        let p = self.precision();
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Scalar::zero(p));
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / &Scalar::from_u64(i as u64 + 1, p));
        }
        Self::new(coeffs, p)
    }

    /// `q(x) = self(a*x + b)`, by Horner's scheme on the linear polynomial.
    pub fn compose_affine(&self, a: &Scalar, b: &Scalar) -> Polynomial {
        let p = self.precision().max(a.precision()).max(b.precision());
        let n = self.degree();
        // acc holds coefficients of the partial Horner result, low to high.
        let mut acc: Vec<Scalar> = Vec::with_capacity(n + 1);
        acc.push(self.coeffs[n].clone());
        for c in self.coeffs[..n].iter().rev() {
            let mut next = Vec::with_capacity(acc.len() + 1);
            next.push(&(&acc[0] * b) + c);
            for j in 1..acc.len() {
                next.push(&(&acc[j] * b) + &(&acc[j - 1] * a));
            }
            next.push(&acc[acc.len() - 1] * a);
            acc = next;
        }
        Self::new(acc, p)
    }

    /// `self(-x)`.
    pub fn reflect(&self) -> Polynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
            .collect();
        Self::new(coeffs, self.precision())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let p = self.precision().max(other.precision());
        let (a, b) = (&self.coeffs, &other.coeffs);
        let n = a.len() + b.len() - 1;
        let term = |k: usize| {
            let lo = k.saturating_sub(b.len() - 1);
            let hi = k.min(a.len() - 1);
            let mut acc = Scalar::zero(p);
            for i in lo..=hi {
                acc = &acc + &(&a[i] * &b[k - i]);
            }
            acc
        };
        let coeffs: Vec<Scalar> = if a.len() * b.len() >= PAR_MUL_THRESHOLD {
            (0..n).into_par_iter().map(term).collect()
        } else {
            (0..n).map(term).collect()
        };
        Self::new(coeffs, p)
    }

    /// `self^k` by repeated squaring; fails before any work if the result
    /// would exceed `degree_cap`.
    pub fn power(&self, k: usize, degree_cap: usize) -> Result<Polynomial, PolyError> {
        if k == 0 {
            return Err(PolyError::ZeroPower);
        }
        let requested = self.degree().saturating_mul(k);
        if requested > degree_cap {
            return Err(PolyError::DegreeCap { requested, cap: degree_cap });
        }
        let mut result: Option<Polynomial> = None;
        let mut base = self.clone();
        let mut e = k;
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.mul(&base),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base);
        }
        Ok(result.expect("k >= 1"))
    }

    fn combine(&self, other: &Polynomial, sub: bool) -> Polynomial {
        let p = self.precision().max(other.precision());
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Scalar::zero(p);
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).unwrap_or(&zero);
                let b = other.coeffs.get(i).unwrap_or(&zero);
                if sub {
                    a - b
                } else {
                    a + b
                }
            })
            .collect();
        Self::new(coeffs, p)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.combine(other, true)
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<f64> = self.coeffs.iter().map(Scalar::to_f64).collect();
        write!(f, "Polynomial(deg {}, {:?})", self.degree(), c)
    }
}

/// Free-function form of [`Polynomial::eval`].
pub fn eval(p: &Polynomial, x: &Scalar) -> Scalar {
    p.eval(x)
}

/// Free-function form of [`Polynomial::compose_affine`].
pub fn compose_affine(p: &Polynomial, a: &Scalar, b: &Scalar) -> Polynomial {
    p.compose_affine(a, b)
}

/// Free-function form of [`Polynomial::antiderivative`].
pub fn antiderivative(p: &Polynomial) -> Polynomial {
    p.antiderivative()
}

/// Free-function form of [`Polynomial::power`].
pub fn power(p: &Polynomial, k: usize, degree_cap: usize) -> Result<Polynomial, PolyError> {
    p.power(k, degree_cap)
}
