//! The tester: parameter schedule, slices along the hypothesis direction,
//! and the slice mass, orthogonal moment and non-negativity checks.

mod checks;
mod orthobasis;
mod params;
mod run;
mod slices;

use thiserror::Error;

use crate::data::DataError;
use crate::learner::LearnerError;
use crate::poly::PolyError;

pub use checks::{
    certificate_check, certificate_matrix, mass_check, min_eigenpair, moment_check, scalar_certificate, CertificateOutcome, MassOutcome,
    MomentOutcome, RESIDUAL_TOL,
};
pub use orthobasis::orthobasis;
pub use params::{schedule, Overrides, TheoreticalSchedule, TesterParams, DEFAULT_MIN_COUNT, DEFAULT_SCHEDULE_CONSTANT};
pub use run::{bucket, moment_test, nonneg_certificate, run_tester, slice_mass_test, RejectCause, SliceData, SliceReport, TestReport, Verdict};
pub use slices::{build_slices, slice_position, Slice};

#[derive(Debug, Error)]
pub enum TesterError {
    #[error("invalid tester parameters: {0}")]
    InvalidParams(String),
    #[error("eigendecomposition check failed: {0}")]
    Eigen(String),
    #[error("learner failed: {0}")]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}
