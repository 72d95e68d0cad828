use serde::{Deserialize, Serialize};

use crate::special::normal_interval_mass;

use super::TesterError;

/// `(lo, hi]` along the hypothesis direction. The outer slices are
/// unbounded; infinite ends serialize as `null`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub lo: f64,
    pub hi: f64,
    /// 1-based, in ascending order along the direction.
    pub index: usize,
}

impl Slice {
    pub fn contains(&self, z: f64) -> bool {
        self.lo < z && z <= self.hi
    }

    pub fn gaussian_mass(&self) -> f64 {
        normal_interval_mass(self.lo, self.hi)
    }
}

/// Breakpoints `s_i = s_1 + (i - 1) Delta` with `s_1 = -C sqrt(log(1/eps))`,
/// `n = 2 ceil(C sqrt(log(1/eps)) / Delta)` of them, and the `n + 1` slices
/// they cut.
pub fn build_slices(epsilon: f64, delta_slice: f64, range_constant: f64) -> Result<Vec<Slice>, TesterError> {
    if !(delta_slice > 0.0 && delta_slice.is_finite()) {
        return Err(TesterError::InvalidParams(format!("Delta_slice must be positive, got {delta_slice}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0 && range_constant > 0.0) {
        return Err(TesterError::InvalidParams(format!("slices need epsilon in (0, 1) and a positive range constant, got {epsilon}, {range_constant}")));
    }
    let reach = range_constant * (1.0 / epsilon).ln().sqrt();
    let count = (reach / delta_slice).ceil();
    if count > 1e6 {
        return Err(TesterError::InvalidParams(format!("{} breakpoints is too many", 2.0 * count)));
    }
    let n = 2 * count as usize;
    let s: Vec<f64> = (0..n).map(|i| -reach + i as f64 * delta_slice).collect();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let lo = if i == 0 { f64::NEG_INFINITY } else { s[i - 1] };
        let hi = if i == n { f64::INFINITY } else { s[i] };
        out.push(Slice { lo, hi, index: i + 1 });
    }
    Ok(out)
}

/// Position in `slices` of the slice containing `z`.
pub fn slice_position(slices: &[Slice], z: f64) -> usize {
    // Slices are contiguous, so this counts the upper ends strictly below z.
    slices[..slices.len() - 1].partition_point(|s| s.hi < z)
}
