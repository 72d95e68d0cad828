//! Distributions that violate one of the three tested properties on a
//! designated slice along the target direction.

use rand::Rng;
use rayon::prelude::*;

use crate::special::normal_interval_mass;
use crate::tester::orthobasis;

use super::dataset::Interval;
use super::halfspace::dot;
use super::massart::{labels_with, MassartModel};
use super::rng::{domain, stream_rng};
use super::DataError;

/// Each point of `slice` moves, with probability `shift / mass(slice)`, to
/// `lo - 2` or `hi + 2` along `w` (a fair coin picks the side).
pub fn slice_mass_shift(x: &mut [f64], d: usize, w: &[f64], slice: &Interval, shift: f64, seed: u64) -> Result<(), DataError> {
    slice.validate()?;
    let mass = normal_interval_mass(slice.lo, slice.hi);
    if !(shift > 0.0 && shift <= mass) {
        return Err(DataError::Unsatisfiable(format!("mass shift {shift} must lie in (0, {mass}], the Gaussian mass of the slice")));
    }
    let p = shift / mass;
    x.par_chunks_mut(d).enumerate().for_each(|(i, row)| {
        let z = dot(w, row);
        if slice.contains(z) {
            let mut rng = stream_rng(seed, domain::ADVERSARY, i as u64);
            if rng.random::<f64>() < p {
                let dest = if rng.random::<f64>() < 0.5 { slice.lo - 2.0 } else { slice.hi + 2.0 };
                for (a, b) in row.iter_mut().zip(w) {
                    *a += (dest - z) * b;
                }
            }
        }
    });
    Ok(())
}

/// Scale `sqrt(1 + sqrt(2) * deviation)` applied to a standard normal
/// coordinate moves `E[He_2]` from 0 to `deviation`.
pub fn skew_scale(deviation: f64) -> Result<f64, DataError> {
    let s2 = 1.0 + std::f64::consts::SQRT_2 * deviation;
    if !(s2 > 0.0 && deviation.is_finite()) {
        return Err(DataError::Unsatisfiable(format!("He_2 deviation {deviation} needs 1 + sqrt(2)*deviation > 0")));
    }
    Ok(s2.sqrt())
}

/// Inside `slice`, rescales the coordinate along the first column `e` of
/// `orthobasis(w)`. The `w` coordinate and every other orthogonal
/// coordinate are untouched, so only moments involving `e` move.
pub fn orthogonal_skew(x: &mut [f64], d: usize, w: &[f64], slice: &Interval, deviation: f64) -> Result<(), DataError> {
    slice.validate()?;
    let sigma = skew_scale(deviation)?;
    let u = orthobasis(w).map_err(|e| DataError::InvalidParams(e.to_string()))?;
    let e: Vec<f64> = u.column(0).iter().copied().collect();
    x.par_chunks_mut(d).for_each(|row| {
        if slice.contains(dot(w, row)) {
            let c = dot(&e, row);
            for (a, b) in row.iter_mut().zip(&e) {
                *a += (sigma - 1.0) * c * b;
            }
        }
    });
    Ok(())
}

/// Massart labels with the flip rate raised to `eta_bound + excess` on
/// `slice`, which must lie on one side of the target threshold.
pub fn noise_excess_labels(x: &[f64], d: usize, model: &MassartModel, slice: &Interval, excess: f64, seed: u64) -> Result<Vec<i8>, DataError> {
    slice.validate()?;
    let t = model.target.t;
    if !(slice.hi <= t || slice.lo >= t) {
        return Err(DataError::Unsatisfiable(format!("slice ({}, {}] straddles the target threshold {t}", slice.lo, slice.hi)));
    }
    let rate = model.eta_bound + excess;
    if !(excess > 0.0 && rate <= 1.0) {
        return Err(DataError::Unsatisfiable(format!("excess {excess} must be positive with eta_bound + excess <= 1")));
    }
    let v = &model.target.v;
    Ok(labels_with(x, d, seed, |row| model.target.classify(row), |row| if slice.contains(dot(v, row)) { rate } else { model.rate(row) }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skew_scale_hits_target_moment() {
        let s = skew_scale(0.25).unwrap();
        // E[He_2(s z)] = (s^2 - 1)/sqrt(2).
        assert!(((s * s - 1.0) / std::f64::consts::SQRT_2 - 0.25).abs() < 1e-15);
        assert!(skew_scale(-1.0).is_err());
    }

    #[test]
    fn shift_larger_than_slice_is_rejected() {
        let mut x = vec![0.05, 0.0];
        let s = Interval { lo: 0.0, hi: 0.1 };
        assert!(matches!(slice_mass_shift(&mut x, 2, &[1.0, 0.0], &s, 0.05, 1), Err(DataError::Unsatisfiable(_))));
    }
}
