use serde::{Deserialize, Serialize};

use crate::data::{derive_seed, DataError, Dataset, Generator, Halfspace};
use crate::limits::Limits;
use crate::tester::{run_tester, schedule, Overrides, Verdict};

use super::{LearnerError, LearnerSpec};

/// Fresh labeled samples on demand. Distinct tags give independent draws.
pub trait DataSource: Sync {
    fn draw(&self, tag: u64, n: usize) -> Result<Dataset, DataError>;
    fn dim(&self) -> usize;
}

/// Draws from `generator` with the seed derived from `(seed, tag)`.
pub struct GeneratorSource {
    pub generator: Generator,
    pub seed: u64,
    pub limits: Limits,
}

impl DataSource for GeneratorSource {
    fn draw(&self, tag: u64, n: usize) -> Result<Dataset, DataError> {
        self.generator.with_n(n).generate(derive_seed(self.seed, tag), &self.limits)
    }

    fn dim(&self) -> usize {
        self.generator.dims().0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasAgnosticConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub eta: f64,
    pub overrides: Overrides,
    pub learner: LearnerSpec,
    #[serde(default = "default_cap")]
    pub max_iterations: usize,
}

fn default_cap() -> usize {
    40
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub i: usize,
    pub gamma: f64,
    /// `gamma` after the tester's clamps.
    pub gamma_effective: f64,
    pub verdict: Verdict,
    pub reject_kind: Option<String>,
    pub validation_error: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    StopRule,
    IterationCap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasAgnosticOutcome {
    pub hypothesis: Halfspace,
    pub validation_error: f64,
    pub validation_size: usize,
    pub termination: Termination,
    pub trace: Vec<TraceEntry>,
}

/// Runs the tester-learner at `gamma_i = 2^-i`, clamped to 1/2, on fresh samples,
/// scores each accepted hypothesis on a fresh validation sample of size
/// `ceil(8 / eps^2)`, and stops at the first accepted index whose error is
/// within `eps / 2` below the previous accepted one.
pub fn bias_agnostic(source: &dyn DataSource, cfg: &BiasAgnosticConfig, limits: &Limits) -> Result<BiasAgnosticOutcome, LearnerError> {
    let d = source.dim();
    let n_val = (8.0 / (cfg.epsilon * cfg.epsilon)).ceil() as usize;
    let mut trace = Vec::new();
    let mut accepted: Vec<(Halfspace, f64)> = Vec::new();
    let tester_err = |e: crate::tester::TesterError| LearnerError::Tester(e.to_string());
    for i in 0..=cfg.max_iterations {
        let gamma = 0.5f64.powi(i as i32);
        let params = schedule(cfg.epsilon, cfg.delta, cfg.eta, gamma.min(0.5), d, &cfg.overrides, limits).map_err(tester_err)?;
        let learner = cfg.learner.with_gamma(params.gamma).build()?;
        let tag = 3 * i as u64;
        let phase1 = source.draw(tag, params.n)?;
        let phase2 = source.draw(tag + 1, params.n)?;
        let report = run_tester(learner.as_ref(), &phase1, &phase2, &params, limits).map_err(tester_err)?;
        let mut entry = TraceEntry {
            i,
            gamma,
            gamma_effective: params.gamma,
            verdict: report.verdict,
            reject_kind: report.reject_cause.as_ref().map(|c| c.kind().to_string()),
            validation_error: None,
        };
        if let Some(h) = report.hypothesis {
            let err = source.draw(tag + 2, n_val)?.error_of(&h);
            entry.validation_error = Some(err);
            trace.push(entry);
            let stop = accepted.last().is_some_and(|(_, prev)| prev - err <= cfg.epsilon / 2.0);
            accepted.push((h, err));
            if stop {
                let (hypothesis, validation_error) = accepted.pop().expect("just pushed");
                return Ok(BiasAgnosticOutcome { hypothesis, validation_error, validation_size: n_val, termination: Termination::StopRule, trace });
            }
        } else {
            trace.push(entry);
        }
    }
    if accepted.len() < 2 {
        return Err(LearnerError::IterationCap { cap: cfg.max_iterations, accepted: accepted.len() });
    }
    let (hypothesis, validation_error) = accepted.pop().expect("two acceptances");
    Ok(BiasAgnosticOutcome { hypothesis, validation_error, validation_size: n_val, termination: Termination::IterationCap, trace })
}
