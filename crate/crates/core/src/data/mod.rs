//! Gaussian samples, Massart label oracles, adversarial generators and a
//! brute-force reference for the best biased halfspace.

mod adversary;
mod dataset;
mod halfspace;
mod io;
mod massart;
mod opt;
pub mod rng;

pub use rng::derive_seed;

use thiserror::Error;

pub use adversary::{noise_excess_labels, orthogonal_skew, skew_scale, slice_mass_shift};
pub use dataset::{random_orthogonal, sample_gaussian, Dataset, Generator, Interval, Provenance};
pub use halfspace::{bias_of, bias_of_threshold, dot, Halfspace, UNIT_TOL};
pub use io::{read_binary, write_binary, write_csv, Sidecar};
pub use massart::{massart_labels, EtaProfile, MassartModel};
pub use opt::{bias_radius, opt_error_bruteforce, project, sweep_hypothesis, sweep_thresholds, SweepResult};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unsatisfiable adversary request: {0}")]
    Unsatisfiable(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("malformed dataset: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
