//! The acceptance battery. Each criterion produces a deterministic JSON
//! report plus a pass flag; timing is kept outside the report so reruns
//! can be compared byte for byte.

mod identities;
mod sandwich_grid;
mod statistical;

use std::sync::OnceLock;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::derive_seed;
use crate::limits::Limits;
use crate::tester::Overrides;

pub use sandwich_grid::{degree_fit, grid_reports, DegreeFit, ALPHA_GRID, T_GRID};
pub use statistical::{adversary_experiment, bias_agnostic_experiment, completeness_experiment, planted_target, AdversaryKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    /// Sandwich constants profile for criteria 1 to 3.
    pub profile: String,
    /// Patched over the completeness profile of criterion 5.
    pub completeness_overrides: Overrides,
    pub limits: Limits,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 20240601,
            trials: 20,
            profile: crate::sandwich::DEFAULT_PROFILE.to_string(),
            completeness_overrides: Overrides::default(),
            limits: Limits::default(),
        }
    }
}

impl SuiteConfig {
    pub fn criterion_seed(&self, id: usize) -> u64 {
        derive_seed(self.seed, id as u64)
    }
}

pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub description: &'static str,
}

pub const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, name: "sandwich-pointwise", description: "p- <= 1(x>=t) <= p+ on 10^4 grid points over [-3B, 3B] and 100 tail points out to 10B, every cell" },
    Criterion { id: 2, name: "sandwich-gap", description: "E[p+ - p-] / Pr[x>=t] <= alpha on every cell, moments and quadrature agreeing to 1e-12" },
    Criterion { id: 3, name: "degree-shape", description: "fitted degree exponents: hard limit (t+1)^8 and (1/alpha)^4" },
    Criterion { id: 4, name: "identities", description: "Chebyshev, Hermite and Gaussian moment identities" },
    Criterion { id: 5, name: "completeness", description: "d=4, eta=0.2, bias 0.3, N=5e4, l=3: accept >= 18/20, error <= opt + 0.05" },
    Criterion { id: 6, name: "soundness", description: "each adversary: reject >= 18/20, matching cause >= 16/20" },
    Criterion { id: 7, name: "certificate-degree-0", description: "scalar and matrix l=0 certificates agree to 1e-12 on 50 datasets" },
    Criterion { id: 8, name: "moment-transfer", description: "|E_S p - E_N p| <= 1.1 tau_hat d^l for 20 x 20 passing cases" },
    Criterion { id: 9, name: "bias-agnostic", description: "bias 0.25 and 0.1, eta=0.1: stop rule fires every trial, error <= opt + eps in >= 18/20" },
    Criterion { id: 10, name: "determinism", description: "criteria 1, 5, 6, 9 rerun with the same seeds give byte-identical reports" },
];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    pub summary: String,
    pub report: serde_json::Value,
    pub seconds: f64,
}

impl CriterionResult {
    /// The report as written to disk.
    pub fn report_bytes(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(&self.report).expect("json values serialize");
        v.push(b'\n');
        v
    }

    pub fn line(&self) -> String {
        format!("{} criterion {:>2} {:<22} {}", if self.pass { "PASS" } else { "FAIL" }, self.id, self.name, self.summary)
    }
}

/// Runs criteria and remembers their reports, so the determinism check
/// can compare against the first run instead of running everything twice.
pub struct Suite {
    pub cfg: SuiteConfig,
    grid: OnceLock<Result<Vec<sandwich_grid::Cell>, String>>,
    first: std::sync::Mutex<Vec<(usize, Vec<u8>)>>,
}

/// `(pass, summary, report)` from a criterion body.
type Outcome = (bool, String, serde_json::Value);

impl Suite {
    pub fn new(cfg: SuiteConfig) -> Self {
        Suite { cfg, grid: OnceLock::new(), first: std::sync::Mutex::new(Vec::new()) }
    }

    fn grid(&self) -> &Result<Vec<sandwich_grid::Cell>, String> {
        self.grid.get_or_init(|| sandwich_grid::compute_grid(&self.cfg).map_err(|e| e.to_string()))
    }

    pub fn run(&self, id: usize) -> CriterionResult {
        let start = Instant::now();
        let (pass, summary, report) = self.body(id);
        let c = &CRITERIA[id - 1];
        let res = CriterionResult { id, name: c.name.to_string(), pass, summary, report, seconds: start.elapsed().as_secs_f64() };
        self.first.lock().expect("not poisoned").push((id, res.report_bytes()));
        res
    }

    fn body(&self, id: usize) -> Outcome {
        let failed = |e: String| (false, format!("error: {e}"), serde_json::json!({ "error": e }));
        match id {
            1..=3 => match self.grid() {
                Ok(cells) => match id {
                    1 => sandwich_grid::criterion_pointwise(cells),
                    2 => sandwich_grid::criterion_gap(cells),
                    _ => sandwich_grid::criterion_degree(cells),
                },
                Err(e) => failed(e.clone()),
            },
            4 => identities::criterion(self.cfg.criterion_seed(4)),
            5 => statistical::criterion_completeness(&self.cfg).unwrap_or_else(|e| failed(e.to_string())),
            6 => statistical::criterion_soundness(&self.cfg).unwrap_or_else(|e| failed(e.to_string())),
            7 => statistical::criterion_degree0(&self.cfg).unwrap_or_else(|e| failed(e.to_string())),
            8 => statistical::criterion_moment_transfer(&self.cfg).unwrap_or_else(|e| failed(e.to_string())),
            9 => statistical::criterion_bias_agnostic(&self.cfg).unwrap_or_else(|e| failed(e.to_string())),
            10 => self.determinism(),
            _ => failed(format!("no criterion {id}")),
        }
    }

    /// Reruns 1, 5, 6 and 9 from scratch and compares report bytes with
    /// the earlier run of each, running it first if needed.
    fn determinism(&self) -> Outcome {
        let mut rows = Vec::new();
        let mut all = true;
        for id in [1usize, 5, 6, 9] {
            let earlier = self.first.lock().expect("not poisoned").iter().find(|(i, _)| *i == id).map(|(_, b)| b.clone());
            let earlier = match earlier {
                Some(b) => b,
                None => self.run(id).report_bytes(),
            };
            let fresh = Suite::new(self.cfg.clone()).run(id).report_bytes();
            let same = earlier == fresh;
            all &= same;
            rows.push(serde_json::json!({ "criterion": id, "identical": same, "bytes": fresh.len() }));
        }
        let summary = format!("{} of 4 reruns byte-identical", rows.iter().filter(|r| r["identical"] == true).count());
        (all, summary, serde_json::json!({ "reruns": rows }))
    }
}
