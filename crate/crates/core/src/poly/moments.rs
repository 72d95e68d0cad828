use crate::scalar::Scalar;

use super::Polynomial;

/// `E[x^n]` for `x ~ N(0, 1)`: `(n-1)!!` for even `n`, zero for odd `n`.
pub fn gaussian_moment(n: usize, precision: usize) -> Scalar {
    if n % 2 == 1 {
        return Scalar::zero(precision);
    }
    let mut acc = Scalar::one(precision);
    let mut j = 1;
    while j < n {
        acc = acc * Scalar::from_u64(j as u64, precision);
        j += 2;
    }
    acc
}

/// All moments `E[x^i]` for `0 <= i <= n_max`.
pub fn gaussian_moments(n_max: usize, precision: usize) -> Vec<Scalar> {
    let mut out = Vec::with_capacity(n_max + 1);
    for i in 0..=n_max {
        let m = match i {
            0 => Scalar::one(precision),
            _ if i % 2 == 1 => Scalar::zero(precision),
            _ => &out[i - 2] * &Scalar::from_u64(i as u64 - 1, precision),
        };
        out.push(m);
    }
    out
}

/// `E[p(x)]` for `x ~ N(0, 1)`, summed exactly from the moments.
pub fn gaussian_expectation(p: &Polynomial) -> Scalar {
    let prec = p.precision();
    let moments = gaussian_moments(p.degree(), prec);
    let mut acc = Scalar::zero(prec);
    for (c, m) in p.coeffs().iter().zip(&moments).step_by(2) {
        acc = &acc + &(c * m);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{chebyshev, hermite_normalized};

    #[test]
    fn moment_examples() {
        assert!(gaussian_moment(1, 128).is_zero());
        assert_eq!(gaussian_moment(2, 128).to_f64(), 1.0);
        assert_eq!(gaussian_moment(6, 128).to_f64(), 15.0);
        let all = gaussian_moments(12, 128);
        for (i, m) in all.iter().enumerate() {
            assert_eq!(m, &gaussian_moment(i, 128));
        }
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(gaussian_expectation(&Polynomial::from_f64(&[1.0], 128)).to_f64(), 1.0);
        assert!(gaussian_expectation(&Polynomial::from_f64(&[-1.0, 0.0, 1.0], 128)).is_zero());
        // T_4 = 8x^4 - 8x^2 + 1, so E = 24 - 8 + 1.
        assert_eq!(gaussian_expectation(&chebyshev(4, 128)).to_f64(), 17.0);
    }

    #[test]
    fn hermite_orthonormality() {
        let p = 512;
        let h: Vec<_> = (0..=8).map(|k| hermite_normalized(k, p)).collect();
        for i in 0..=8 {
            for j in 0..=8 {
                let e = gaussian_expectation(&h[i].mul(&h[j]));
                let want = if i == j { 1.0 } else { 0.0 };
                let err = (e - Scalar::from_f64(want, p)).abs().to_f64();
                assert!(err <= 1e-20, "({i},{j}) err {err}");
            }
        }
    }
}
