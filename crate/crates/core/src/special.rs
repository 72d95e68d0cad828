//! Normal distribution functions.
//!
//! Double-precision `erfc` comes from `libm` and the quantile from `statrs`.
//! The extended precision upper tail [`gaussian_tail`] is evaluated here
//! because the certified gap ratio divides by it.

use libm::erfc;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::scalar::Scalar;

/// `Φ(x)` in double precision.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `1 - Φ(x)` without cancellation for large `x`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Gaussian mass of the half-open interval `(lo, hi]`, infinite ends allowed.
pub fn normal_interval_mass(lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    // Subtract on whichever side keeps both terms small.
    if lo >= 0.0 {
        normal_sf(lo) - normal_sf(hi)
    } else if hi <= 0.0 {
        normal_cdf(hi) - normal_cdf(lo)
    } else {
        1.0 - normal_cdf(lo) - normal_sf(hi)
    }
}

/// `Φ^{-1}(p)` for `p` in (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    let x = Normal::standard().inverse_cdf(p);
    // One Newton step against the accurate CDF.
    let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if density > 0.0 {
        x - (normal_cdf(x) - p) / density
    } else {
        x
    }
}

/// Standard normal density in extended precision.
pub fn gaussian_density(x: &Scalar) -> Scalar {
    let p = x.precision();
    let half = Scalar::from_ratio(1, 2, p);
    let e = (-(x * x) * half).exp();
    let two_pi = Scalar::pi(p) * Scalar::from_i64(2, p);
    e / two_pi.sqrt()
}

/// Above this threshold the continued fraction replaces the series.
const CF_THRESHOLD: f64 = 40.0;

/// `Pr[x >= t]` for `x ~ N(0, 1)`, at the precision of `t`.
pub fn gaussian_tail(t: &Scalar) -> Scalar {
    let p = t.precision();
    if t.is_negative() {
        return Scalar::one(p) - gaussian_tail(&-t);
    }
    let tf = t.to_f64();
    if tf > CF_THRESHOLD {
        return tail_continued_fraction(t);
    }
    // Q(t) = 1/2 - φ(t) Σ t^{2n+1}/(2n+1)!!. The subtraction loses about
    // log2(1/Q(t)) bits, so the series runs with that many guard bits.
    let guard = 64 + (0.75 * tf * tf + 2.0 * tf.max(1.0).log2()).ceil() as usize;
    let wp = p + guard;
    let tw = t.with_precision(wp);
    let t2 = &tw * &tw;
    let mut term = tw.clone();
    let mut sum = tw.clone();
    let mut n: u64 = 0;
    loop {
        n += 1;
        term = &(&term * &t2) / &Scalar::from_u64(2 * n + 1, wp);
        sum = &sum + &term;
        if term.is_zero() {
            break;
        }
        // Terms decrease once 2n+1 > t^2, then stop past the working bits.
        if (2 * n + 1) as f64 > tf * tf {
            match (term.exponent(), sum.exponent()) {
                (Some(et), Some(es)) if es - et > wp as i64 + 2 => break,
                _ => {}
            }
        }
    }
    let q = Scalar::from_ratio(1, 2, wp) - gaussian_density(&tw) * sum;
    q.with_precision(p)
}

fn tail_continued_fraction(t: &Scalar) -> Scalar {
    // Q(t) = φ(t) / (t + 1/(t + 2/(t + 3/(t + ...)))), evaluated backward.
    let p = t.precision();
    let wp = p + 64;
    let tw = t.with_precision(wp);
    let depth = 4 * p as u64;
    let mut acc = tw.clone();
    for j in (1..=depth).rev() {
        acc = &tw + &(Scalar::from_u64(j, wp) / &acc);
    }
    (gaussian_density(&tw) / acc).with_precision(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_precision_cdf() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_sf(1.0) - 0.15865525393145705).abs() < 1e-16);
        assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-9);
        assert_eq!(normal_quantile(0.5), 0.0);
        assert!((normal_interval_mass(f64::NEG_INFINITY, f64::INFINITY) - 1.0).abs() < 1e-15);
        assert!((normal_interval_mass(-1.0, 1.0) - 0.6826894921370859).abs() < 1e-15);
    }

    #[test]
    fn extended_tail_known_values() {
        let p = 256;
        assert_eq!(gaussian_tail(&Scalar::zero(p)).to_f64(), 0.5);
        let q1 = gaussian_tail(&Scalar::one(p)).to_f64();
        assert!((q1 - 0.15865525393145705).abs() < 1e-17);
        // Q(5) = 2.866515718791939e-7.
        let q5 = gaussian_tail(&Scalar::from_i64(5, p)).to_f64();
        assert!((q5 / 2.866515718791939e-7 - 1.0).abs() < 1e-14);
        let qm = gaussian_tail(&Scalar::from_i64(-1, p)).to_f64();
        assert!((qm - (1.0 - 0.15865525393145705)).abs() < 1e-16);
    }

    #[test]
    fn series_and_continued_fraction_meet() {
        let p = 256;
        let t = Scalar::from_f64(CF_THRESHOLD - 1e-9, p);
        let series = gaussian_tail(&t);
        let cf = tail_continued_fraction(&t);
        let rel = ((series - cf.clone()) / cf).abs();
        assert!(rel.exponent().is_none_or(|e| e < -200));
    }
}
