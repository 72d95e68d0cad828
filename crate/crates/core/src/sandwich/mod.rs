//! Multiplicative sandwiching polynomials for the threshold `1(x >= t)`.
//!
//! The construction smooths a window indicator with a normalized Chebyshev
//! bump, shifts it by the bump half-width, and subtracts a growth term and a
//! constant floor so the result stays below the indicator everywhere. The
//! upper polynomial is the reflection `1 - p_-(2t - x)`.

mod calibrate;
mod construct;
mod params;
mod profile;
mod verify;

use thiserror::Error;

use crate::poly::PolyError;

pub use calibrate::{calibrate_constants, CalibrationOptions, CalibrationOutcome, CalibrationTarget};
pub use construct::{build_sandwich, bump_f, normalization, step_poly, working_precision, PairSummary, SandwichPair};
pub use params::{select_params, SandwichConstants, SandwichParams};
pub use profile::{profile, DEFAULT_PROFILE, PROFILES};
pub use verify::{verification_points, verify_pair, VerificationReport, VerifyOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SandwichError {
    #[error("alpha must lie in (0, 1/2), got {0}")]
    AlphaOutOfRange(f64),
    #[error("infeasible parameters: degree m*k = {degree} exceeds the degree cap {cap}")]
    DegreeCap { degree: usize, cap: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid constants: {0}")]
    InvalidConstants(String),
    #[error("verification failed at t={t}, alpha={alpha}: {property}")]
    Verification { t: f64, alpha: f64, property: String },
    #[error("calibration failed at cell t={t}, alpha={alpha}: {reason}")]
    Calibration { t: f64, alpha: f64, reason: String },
    #[error("unknown constants profile {0:?}")]
    UnknownProfile(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Builds and verifies a pair, failing with the first violated property.
pub fn build_verified(
    t: f64,
    alpha: f64,
    consts: &SandwichConstants,
    limits: &crate::Limits,
    opts: &VerifyOptions,
) -> Result<(SandwichPair, VerificationReport), SandwichError> {
    let pair = build_sandwich(t, alpha, consts, limits)?;
    let report = verify_pair(&pair, opts);
    let property = if !report.pointwise_pass {
        Some(format!("pointwise sandwiching, max violation {:e}", report.max_violation))
    } else if !report.gap_pass {
        Some(format!("gap ratio {:.6e} exceeds alpha", report.gap_ratio))
    } else {
        None
    };
    match property {
        Some(property) => Err(SandwichError::Verification { t, alpha, property }),
        None => Ok((pair, report)),
    }
}
