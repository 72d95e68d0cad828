//! Resource caps shared across modules.

use serde::{Deserialize, Serialize};

use crate::scalar::{DEFAULT_PRECISION, MIN_PRECISION};

/// Caps that turn infeasible parameter schedules into errors instead of
/// runaway computations. All of them are configuration keys.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Limits {
    /// Largest polynomial degree any construction may produce.
    pub degree_cap: usize,
    /// Largest moment-matrix side length, i.e. number of multi-indices.
    pub matrix_dim_cap: usize,
    /// Requested working precision in bits. Constructions may raise it.
    pub precision_bits: usize,
    /// Largest per-phase sample budget the tester schedule may request.
    pub sample_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            degree_cap: 200_000,
            matrix_dim_cap: 2000,
            precision_bits: DEFAULT_PRECISION,
            sample_cap: 10_000_000,
        }
    }
}

impl Limits {
    pub fn precision(&self) -> usize {
        self.precision_bits.max(MIN_PRECISION)
    }
}
