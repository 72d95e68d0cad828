use serde::{Deserialize, Serialize};

use crate::special::normal_cdf;

use super::DataError;

/// `x -> sign(v.x - t)` with `sign(0) = +1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Halfspace {
    pub v: Vec<f64>,
    pub t: f64,
}

pub const UNIT_TOL: f64 = 1e-12;

impl Halfspace {
    /// Normalizes `v`. Fails on a zero or non-finite direction.
    pub fn new(v: Vec<f64>, t: f64) -> Result<Self, DataError> {
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) || !t.is_finite() {
            return Err(DataError::InvalidParams(format!("halfspace needs a finite nonzero direction and threshold, got |v| = {norm}, t = {t}")));
        }
        Ok(Halfspace { v: v.into_iter().map(|a| a / norm).collect(), t })
    }

    /// Checks `|v| = 1` within [`UNIT_TOL`] without renormalizing.
    pub fn validate(&self) -> Result<(), DataError> {
        let norm = self.v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL || !self.t.is_finite() {
            return Err(DataError::InvalidParams(format!("halfspace direction must be unit, got |v| = {norm}")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn margin(&self, x: &[f64]) -> f64 {
        dot(&self.v, x) - self.t
    }

    pub fn classify(&self, x: &[f64]) -> i8 {
        if self.margin(x) >= 0.0 {
            1
        } else {
            -1
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `min(Pr[f = 1], Pr[f = -1])` under the standard Gaussian.
pub fn bias_of(h: &Halfspace) -> f64 {
    bias_of_threshold(h.t)
}

pub fn bias_of_threshold(t: f64) -> f64 {
    // The lower tail is the smaller side and is accurate far out.
    normal_cdf(-t.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_convention() {
        let h = Halfspace::new(vec![3.0, 4.0], 1.0).unwrap();
        assert!((h.v[0] - 0.6).abs() < 1e-15);
        assert_eq!(h.classify(&[1.0 / 0.6, 0.0]), 1);
        assert_eq!(h.classify(&[0.0, 0.0]), -1);
        let h0 = Halfspace::new(vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(h0.classify(&[0.0, 5.0]), 1);
        assert!(Halfspace::new(vec![0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn bias_values() {
        assert_eq!(bias_of_threshold(0.0), 0.5);
        assert!((bias_of_threshold(1.0) - 0.15865525393145705).abs() < 1e-15);
        assert_eq!(bias_of_threshold(1.3), bias_of_threshold(-1.3));
    }
}
