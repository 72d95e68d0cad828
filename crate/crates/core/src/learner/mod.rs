//! Proper learners for the first phase and the wrapper that removes the
//! need to know the target's bias.

mod bias_agnostic;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{project, sweep_thresholds, DataError, Dataset, Halfspace};

pub use bias_agnostic::{bias_agnostic, BiasAgnosticConfig, BiasAgnosticOutcome, DataSource, GeneratorSource, Termination, TraceEntry};

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("dataset provenance records no planted target")]
    NoPlantedTarget,
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("invalid learner configuration: {0}")]
    Config(String),
    #[error("iteration cap {cap} reached with {accepted} acceptance(s)")]
    IterationCap { cap: usize, accepted: usize },
    #[error("tester failed inside the wrapper: {0}")]
    Tester(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("reading external hypothesis {path}: {reason}")]
    External { path: String, reason: String },
}

/// A proper learner: dataset in, halfspace out.
pub trait Learner: Sync {
    fn learn(&self, data: &Dataset) -> Result<Halfspace, LearnerError>;
    fn name(&self) -> String;
}

/// Returns the planted target.
pub struct OracleLearner;

impl Learner for OracleLearner {
    fn learn(&self, data: &Dataset) -> Result<Halfspace, LearnerError> {
        data.planted_target().ok_or(LearnerError::NoPlantedTarget)
    }

    fn name(&self) -> String {
        "oracle".into()
    }
}

/// Direction from the Chow vector `sum y_i x_i`, threshold from a
/// bias-restricted sweep.
pub struct ChowSweep {
    pub gamma: f64,
}

pub const CHOW_MIN_SAMPLES: usize = 100;

impl Learner for ChowSweep {
    fn learn(&self, data: &Dataset) -> Result<Halfspace, LearnerError> {
        if data.n < CHOW_MIN_SAMPLES {
            return Err(LearnerError::Degenerate(format!("chow_sweep needs at least {CHOW_MIN_SAMPLES} samples, got {}", data.n)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 0.5) {
            return Err(LearnerError::Config(format!("gamma must lie in (0, 1/2], got {}", self.gamma)));
        }
        let mut chow = vec![0.0; data.d];
        for (row, &y) in data.rows().zip(&data.y) {
            for (c, x) in chow.iter_mut().zip(row) {
                *c += f64::from(y) * x;
            }
        }
        let norm = chow.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(norm >= 1e-9 * data.n as f64) {
            return Err(LearnerError::Degenerate(format!("Chow vector norm {norm:e} is below 1e-9 * n")));
        }
        let w: Vec<f64> = chow.iter().map(|a| a / norm).collect();
        let z = project(data, &w);
        let r = sweep_thresholds(&z, &data.y, self.gamma, false);
        Ok(Halfspace { v: w, t: r.threshold })
    }

    fn name(&self) -> String {
        "chow_sweep".into()
    }
}

/// Reads `{"v": [...], "t": ...}` from a file on every call.
pub struct ExternalLearner {
    pub path: PathBuf,
}

impl Learner for ExternalLearner {
    fn learn(&self, data: &Dataset) -> Result<Halfspace, LearnerError> {
        let err = |reason: String| LearnerError::External { path: self.path.display().to_string(), reason };
        let text = std::fs::read_to_string(&self.path).map_err(|e| err(e.to_string()))?;
        let raw: Halfspace = serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
        if raw.dim() != data.d {
            return Err(err(format!("hypothesis has dimension {}, data has {}", raw.dim(), data.d)));
        }
        Halfspace::new(raw.v, raw.t).map_err(|e| err(e.to_string()))
    }

    fn name(&self) -> String {
        "external".into()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Oracle,
    ChowSweep,
    External,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    pub gamma: f64,
    pub epsilon_prime: f64,
    /// Kind-specific keys. `external` reads `path`.
    #[serde(default)]
    pub config: serde_json::Map<String, serde_json::Value>,
}

impl LearnerSpec {
    pub fn oracle(gamma: f64) -> Self {
        LearnerSpec { kind: LearnerKind::Oracle, gamma, epsilon_prime: 0.0, config: Default::default() }
    }

    pub fn build(&self) -> Result<Box<dyn Learner>, LearnerError> {
        if !(self.gamma > 0.0 && self.gamma <= 0.5) {
            return Err(LearnerError::Config(format!("gamma must lie in (0, 1/2], got {}", self.gamma)));
        }
        let unknown = |allowed: &[&str]| self.config.keys().find(|k| !allowed.contains(&k.as_str())).cloned();
        match self.kind {
            LearnerKind::Oracle | LearnerKind::ChowSweep => {
                if let Some(k) = unknown(&[]) {
                    return Err(LearnerError::Config(format!("unknown config key {k:?}")));
                }
                Ok(match self.kind {
                    LearnerKind::Oracle => Box::new(OracleLearner),
                    _ => Box::new(ChowSweep { gamma: self.gamma }),
                })
            }
            LearnerKind::External => {
                if let Some(k) = unknown(&["path"]) {
                    return Err(LearnerError::Config(format!("unknown config key {k:?}")));
                }
                let path = self.config.get("path").and_then(|v| v.as_str()).ok_or_else(|| LearnerError::Config("external learner needs config.path".into()))?;
                Ok(Box::new(ExternalLearner { path: PathBuf::from(path) }))
            }
        }
    }

    /// Same spec with `gamma` replaced, for sweeps over the bias.
    pub fn with_gamma(&self, gamma: f64) -> Self {
        LearnerSpec { gamma, ..self.clone() }
    }
}
