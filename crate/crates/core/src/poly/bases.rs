use crate::scalar::Scalar;

use super::{PolyError, Polynomial};

/// Chebyshev polynomial of the first kind, `T_m`, from the three-term
/// recurrence. Coefficients are integers and exact while they fit the
/// precision.
pub fn chebyshev(m: usize, precision: usize) -> Polynomial {
    let mut prev = Polynomial::constant(Scalar::one(precision));
    if m == 0 {
        return prev;
    }
    let x = Polynomial::monomial(Scalar::one(precision), 1);
    let two_x = Polynomial::monomial(Scalar::from_i64(2, precision), 1);
    let mut cur = x;
    for _ in 1..m {
        let next = two_x.mul(&cur).sub(&prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// `T_m(x) / x` for odd `m`, a polynomial of degree `m - 1`.
pub fn chebyshev_over_x(m: usize, precision: usize) -> Result<Polynomial, PolyError> {
    if m.is_multiple_of(2) {
        return Err(PolyError::EvenChebyshev(m));
    }
    let t = chebyshev(m, precision);
    // Odd polynomial: drop the (zero) constant term and shift down.
    Ok(Polynomial::new(t.coeffs()[1..].to_vec(), precision))
}

/// Probabilists' Hermite polynomial scaled to unit norm under N(0, 1).
pub fn hermite_normalized(k: usize, precision: usize) -> Polynomial {
    let x = Polynomial::monomial(Scalar::one(precision), 1);
    let mut prev = Polynomial::constant(Scalar::one(precision));
    let mut cur = x.clone();
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = x.mul(&cur).sub(&prev.scale(&Scalar::from_u64(j as u64, precision)));
        prev = cur;
        cur = next;
    }
    let mut fact = Scalar::one(precision);
    for j in 2..=k {
        fact = fact * Scalar::from_u64(j as u64, precision);
    }
    cur.scale(&(Scalar::one(precision) / fact.sqrt()))
}

/// Values `He_0(x), ..., He_l(x)` of the normalized Hermite family in double
/// precision, via the normalized recurrence
/// `He_{j+1} = (x He_j - sqrt(j) He_{j-1}) / sqrt(j + 1)`.
pub fn hermite_normalized_f64(l: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if l == 0 {
        return;
    }
    out.push(x);
    for j in 1..l {
        let next = (x * out[j] - (j as f64).sqrt() * out[j - 1]) / ((j + 1) as f64).sqrt();
        out.push(next);
    }
}
