//! Seeded tester trials shared by the command line and the acceptance suite.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{bias_of, derive_seed, opt_error_bruteforce, DataError, Generator};
use crate::learner::{bias_agnostic, BiasAgnosticConfig, GeneratorSource, LearnerError, LearnerSpec, Termination, TraceEntry};
use crate::limits::Limits;
use crate::tester::{run_tester, schedule, Overrides, TestReport, TesterError, TesterParams, Verdict};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Tester(#[from] TesterError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TesterExperiment {
    /// The sample count inside is replaced by the schedule's `N`.
    pub generator: Generator,
    pub learner: LearnerSpec,
    pub epsilon: f64,
    pub delta: f64,
    pub eta: f64,
    pub gamma: f64,
    #[serde(default)]
    pub overrides: Overrides,
    /// Random directions for the reference optimum; 0 skips it.
    #[serde(default = "default_opt_dirs")]
    pub opt_dirs: usize,
}

fn default_opt_dirs() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial: usize,
    pub seed: u64,
    pub report: TestReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    pub accepted: usize,
    pub accept_rate: f64,
    /// Mean phase-two error over accepted trials.
    pub mean_error: Option<f64>,
    pub opt_ref: Option<f64>,
    /// Mean of `error - opt_reference` over accepted trials.
    pub excess: Option<f64>,
    pub reject_kinds: Vec<(String, usize)>,
}

impl TesterExperiment {
    pub fn params(&self, limits: &Limits) -> Result<TesterParams, ExperimentError> {
        Ok(schedule(self.epsilon, self.delta, self.eta, self.gamma, self.generator.dims().0, &self.overrides, limits)?)
    }

    /// One trial: fresh phase-one and phase-two samples of size `N` from
    /// seeds derived from `seed`, and the reference optimum on phase two.
    pub fn run_trial(&self, trial: usize, seed: u64, limits: &Limits) -> Result<TrialReport, ExperimentError> {
        let params = self.params(limits)?;
        let g = self.generator.with_n(params.n);
        let phase1 = g.generate(derive_seed(seed, 0), limits)?;
        let phase2 = g.generate(derive_seed(seed, 1), limits)?;
        let learner = self.learner.with_gamma(params.gamma).build()?;
        let mut report = run_tester(learner.as_ref(), &phase1, &phase2, &params, limits)?;
        if self.opt_dirs > 0 {
            report.opt_reference = Some(opt_error_bruteforce(&phase2, params.gamma, self.opt_dirs, derive_seed(seed, 2))?);
        }
        Ok(TrialReport { trial, seed, report })
    }

    /// `trials` repetitions with seeds `derive_seed(base_seed, i)`, in order.
    pub fn run(&self, trials: usize, base_seed: u64, limits: &Limits) -> Result<Vec<TrialReport>, ExperimentError> {
        (0..trials).into_par_iter().map(|i| self.run_trial(i, derive_seed(base_seed, i as u64), limits)).collect()
    }
}

pub fn aggregate(trials: &[TrialReport]) -> Aggregate {
    let acc: Vec<&TestReport> = trials.iter().map(|t| &t.report).filter(|r| r.verdict == Verdict::Accept).collect();
    let mean = |v: Vec<f64>| if v.is_empty() { None } else { Some(v.iter().sum::<f64>() / v.len() as f64) };
    let mut kinds: Vec<(String, usize)> = Vec::new();
    for r in trials.iter().filter_map(|t| t.report.reject_cause.as_ref()) {
        match kinds.iter_mut().find(|(k, _)| k == r.kind()) {
            Some((_, c)) => *c += 1,
            None => kinds.push((r.kind().to_string(), 1)),
        }
    }
    kinds.sort();
    Aggregate {
        trials: trials.len(),
        accepted: acc.len(),
        accept_rate: acc.len() as f64 / trials.len().max(1) as f64,
        mean_error: mean(acc.iter().map(|r| r.empirical_error).collect()),
        opt_ref: mean(trials.iter().filter_map(|t| t.report.opt_reference).collect()),
        excess: mean(acc.iter().filter_map(|r| r.opt_reference.map(|o| r.empirical_error - o)).collect()),
        reject_kinds: kinds,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasAgnosticExperiment {
    /// Its planted target supplies the bias of the reference optimum.
    pub generator: Generator,
    pub config: BiasAgnosticConfig,
    #[serde(default = "default_eval_n")]
    pub eval_n: usize,
    #[serde(default = "default_opt_dirs")]
    pub opt_dirs: usize,
}

fn default_eval_n() -> usize {
    20_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasAgnosticTrial {
    pub trial: usize,
    pub seed: u64,
    pub termination: Option<Termination>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hypothesis: Option<crate::data::Halfspace>,
    /// Error of the final hypothesis on a fresh evaluation sample.
    pub error: Option<f64>,
    pub opt_reference: Option<f64>,
    pub within: bool,
    /// Why the wrapper returned no hypothesis.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<String>,
    pub trace: Vec<TraceEntry>,
}

impl BiasAgnosticExperiment {
    pub fn gamma_star(&self) -> Option<f64> {
        self.generator.model().target.validate().ok().map(|_| bias_of(&self.generator.model().target))
    }

    /// One run of the wrapper. Wrapper errors are recorded in the trial;
    /// only failures to produce the evaluation data are returned as errors.
    pub fn run_trial(&self, trial: usize, seed: u64, limits: &Limits) -> Result<BiasAgnosticTrial, ExperimentError> {
        let source = GeneratorSource { generator: self.generator.clone(), seed: derive_seed(seed, 1), limits: *limits };
        let mut out = BiasAgnosticTrial { trial, seed, termination: None, hypothesis: None, error: None, opt_reference: None, within: false, failure: None, trace: Vec::new() };
        match bias_agnostic(&source, &self.config, limits) {
            Ok(o) => {
                let eval = self.generator.with_n(self.eval_n).generate(derive_seed(seed, 2), limits)?;
                let err = eval.error_of(&o.hypothesis);
                if let (Some(g), true) = (self.gamma_star(), self.opt_dirs > 0) {
                    let opt = opt_error_bruteforce(&eval, g, self.opt_dirs, derive_seed(seed, 3))?;
                    out.opt_reference = Some(opt);
                    out.within = err <= opt + self.config.epsilon;
                }
                out.termination = Some(o.termination);
                out.hypothesis = Some(o.hypothesis);
                out.error = Some(err);
                out.trace = o.trace;
            }
            Err(e) => out.failure = Some(e.to_string()),
        }
        Ok(out)
    }

    pub fn run(&self, trials: usize, base_seed: u64, limits: &Limits) -> Result<Vec<BiasAgnosticTrial>, ExperimentError> {
        (0..trials).into_par_iter().map(|i| self.run_trial(i, derive_seed(base_seed, i as u64), limits)).collect()
    }
}
