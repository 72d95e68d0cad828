use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::data::rng::stream_rng;
use crate::data::{derive_seed, dot, sample_gaussian, Generator, Halfspace, Interval, MassartModel};
use crate::experiment::{aggregate, BiasAgnosticExperiment, BiasAgnosticTrial, ExperimentError, TesterExperiment, TrialReport};
use crate::learner::{BiasAgnosticConfig, LearnerKind, LearnerSpec, Termination};
use crate::poly::{enumerate_multi_indices, hermite_tensor_eval};
use crate::special::normal_quantile;
use crate::tester::{build_slices, moment_test, nonneg_certificate, orthobasis, scalar_certificate, Overrides, Slice, TesterError, Verdict};

use super::{Outcome, SuiteConfig};

const D: usize = 4;
const EPSILON: f64 = 0.05;
const DELTA: f64 = 0.1;
const GAMMA: f64 = 0.3;
/// Direction seed for the planted halfspace of criteria 5 and 6.
const TARGET_SEED: u64 = 99;

/// Unit direction from a seeded Gaussian draw with threshold `-Φ⁻¹(gamma)`,
/// so `Pr[<v,x> >= t] = gamma`.
pub fn planted_target(dim: usize, gamma: f64, seed: u64) -> Halfspace {
    let v = Halfspace::new(sample_gaussian(dim, 1, seed), 0.0).expect("nonzero gaussian draw").v;
    Halfspace { v, t: -normal_quantile(gamma) }
}

fn patch(base: Overrides, p: &Overrides) -> Overrides {
    Overrides {
        l: p.l.or(base.l),
        eps_prime: p.eps_prime.or(base.eps_prime),
        n: p.n.or(base.n),
        delta_slice: p.delta_slice.or(base.delta_slice),
        tau_p: p.tau_p.or(base.tau_p),
        tau_m: p.tau_m.or(base.tau_m),
        psd_tol: p.psd_tol.or(base.psd_tol),
        schedule_constant: p.schedule_constant.or(base.schedule_constant),
        range_constant: p.range_constant.or(base.range_constant),
        min_count: p.min_count.or(base.min_count),
    }
}

/// The completeness profile: oracle learner, `l = 3`, `N = 5e4`.
pub fn completeness_experiment(patch_with: &Overrides) -> TesterExperiment {
    let model = MassartModel::constant(planted_target(D, GAMMA, TARGET_SEED), 0.2);
    let base = Overrides { l: Some(3), n: Some(50_000), delta_slice: Some(0.25), tau_p: Some(0.02), tau_m: Some(0.05), psd_tol: Some(0.05), ..Default::default() };
    TesterExperiment {
        generator: Generator::Massart { d: D, n: 1, model },
        learner: LearnerSpec::oracle(GAMMA),
        epsilon: EPSILON,
        delta: DELTA,
        eta: 0.2,
        gamma: GAMMA,
        overrides: patch(base, patch_with),
        opt_dirs: 1000,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryKind {
    SliceMassShift,
    OrthogonalSkew,
    NoiseExcess,
}

impl AdversaryKind {
    pub const ALL: [AdversaryKind; 3] = [AdversaryKind::SliceMassShift, AdversaryKind::OrthogonalSkew, AdversaryKind::NoiseExcess];

    /// The reject cause each adversary is designed to trigger.
    pub fn expected_cause(self) -> &'static str {
        match self {
            AdversaryKind::SliceMassShift => "mass",
            AdversaryKind::OrthogonalSkew => "moment",
            AdversaryKind::NoiseExcess => "certificate",
        }
    }
}

/// The tester slice containing the origin under the soundness schedule.
fn designated_slice() -> Slice {
    build_slices(EPSILON, 0.25, 1.0)
        .expect("fixed slice parameters")
        .into_iter()
        .find(|s| s.contains(0.0))
        .expect("some slice contains the origin")
}

/// The soundness profile: `l = 2`, `N = 1e6`, an oracle learner, and the
/// adversary applied on the designated slice along the target.
pub fn adversary_experiment(kind: AdversaryKind) -> TesterExperiment {
    let model = MassartModel::constant(planted_target(D, GAMMA, TARGET_SEED), 0.2);
    let s = designated_slice();
    let slice = Interval { lo: s.lo, hi: s.hi };
    let generator = match kind {
        AdversaryKind::SliceMassShift => Generator::SliceMassShift { d: D, n: 1, model, slice, shift: 0.06 },
        AdversaryKind::OrthogonalSkew => Generator::OrthogonalSkew { d: D, n: 1, model, slice, deviation: 0.3 },
        AdversaryKind::NoiseExcess => Generator::NoiseExcess { d: D, n: 1, model, slice, excess: 0.1 },
    };
    TesterExperiment {
        generator,
        learner: LearnerSpec::oracle(GAMMA),
        epsilon: EPSILON,
        delta: DELTA,
        eta: 0.2,
        gamma: GAMMA,
        overrides: Overrides { l: Some(2), n: Some(1_000_000), delta_slice: Some(0.25), tau_p: Some(0.01), tau_m: Some(0.05), psd_tol: Some(0.05), ..Default::default() },
        opt_dirs: 0,
    }
}

fn trial_row(t: &TrialReport) -> serde_json::Value {
    let r = &t.report;
    json!({
        "trial": t.trial,
        "seed": t.seed,
        "verdict": r.verdict,
        "reject_cause": r.reject_cause,
        "error": r.empirical_error,
        "opt_reference": r.opt_reference,
        "hypothesis": r.hypothesis,
        "per_slice": r.per_slice,
    })
}

pub(super) fn criterion_completeness(cfg: &SuiteConfig) -> Result<Outcome, ExperimentError> {
    let exp = completeness_experiment(&cfg.completeness_overrides);
    let trials = exp.run(cfg.trials, cfg.criterion_seed(5), &cfg.limits)?;
    let agg = aggregate(&trials);
    let need = (cfg.trials * 9).div_ceil(10);
    let over: Vec<usize> = trials
        .iter()
        .filter(|t| t.report.verdict == Verdict::Accept)
        .filter(|t| t.report.opt_reference.is_some_and(|o| t.report.empirical_error > o + EPSILON))
        .map(|t| t.trial)
        .collect();
    let pass = agg.accepted >= need && over.is_empty();
    let summary = format!(
        "accepted {}/{} (need {need}), {} accepted trials above opt + {EPSILON}, mean excess {}",
        agg.accepted,
        agg.trials,
        over.len(),
        agg.excess.map_or("n/a".into(), |e| format!("{e:.4}"))
    );
    let report = json!({
        "experiment": exp,
        "aggregate": agg,
        "required_accepts": need,
        "accepted_above_opt": over,
        "trials": trials.iter().map(trial_row).collect::<Vec<_>>(),
    });
    Ok((pass, summary, report))
}

pub(super) fn criterion_soundness(cfg: &SuiteConfig) -> Result<Outcome, ExperimentError> {
    let need_reject = (cfg.trials * 9).div_ceil(10);
    let need_match = (cfg.trials * 4).div_ceil(5);
    let mut pass = true;
    let mut parts = Vec::new();
    let mut rows = Vec::new();
    for (j, kind) in AdversaryKind::ALL.into_iter().enumerate() {
        let exp = adversary_experiment(kind);
        let trials = exp.run(cfg.trials, derive_seed(cfg.criterion_seed(6), j as u64), &cfg.limits)?;
        let rejected = trials.iter().filter(|t| t.report.verdict == Verdict::Reject).count();
        let matched = trials.iter().filter(|t| t.report.reject_cause.as_ref().is_some_and(|c| c.kind() == kind.expected_cause())).count();
        let ok = rejected >= need_reject && matched >= need_match;
        pass &= ok;
        parts.push(format!("{}: {rejected}/{} rejected, {matched} as {}", kind.expected_cause(), cfg.trials, kind.expected_cause()));
        rows.push(json!({
            "adversary": kind,
            "experiment": exp,
            "rejected": rejected,
            "matched": matched,
            "pass": ok,
            "aggregate": aggregate(&trials),
            "trials": trials.iter().map(|t| json!({
                "trial": t.trial, "seed": t.seed, "verdict": t.report.verdict, "reject_cause": t.report.reject_cause,
            })).collect::<Vec<_>>(),
        }));
    }
    let report = json!({ "required_rejects": need_reject, "required_matches": need_match, "adversaries": rows });
    Ok((pass, parts.join("; "), report))
}

/// Scalar and 1x1 matrix certificates at `l = 0` on random datasets.
pub(super) fn criterion_degree0(cfg: &SuiteConfig) -> Result<Outcome, TesterError> {
    const TOL: f64 = 1e-12;
    let seed = cfg.criterion_seed(7);
    let rows: Vec<serde_json::Value> = (0..50u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, crate::data::rng::domain::PROBES, i);
            let d = rng.random_range(2..=6usize);
            let n = rng.random_range(200..=2000usize);
            let eta = rng.random_range(0.0..0.45);
            let gamma = rng.random_range(0.05..0.5);
            let target = planted_target(d, gamma, derive_seed(seed, i));
            let data = Generator::Massart { d, n, model: MassartModel::constant(target.clone(), eta) }.generate(derive_seed(seed, 1000 + i), &cfg.limits)?;
            let lo = rng.random_range(-2.0..1.0);
            let slice = Slice { lo, hi: lo + rng.random_range(0.25..1.5), index: 1 };
            let (beta, eps) = (1.0 - 2.0 * eta, 0.05);
            // Hypothesis agreement collected directly from the rows.
            let yh: Vec<f64> = data
                .rows()
                .zip(&data.y)
                .filter(|(x, _)| slice.contains(dot(&target.v, x)))
                .map(|(x, &y)| f64::from(y * target.classify(x)))
                .collect();
            let basis = orthobasis(&target.v)?;
            let matrix = nonneg_certificate(&data, &slice, &target, &basis, 0, beta, eps, 0.0, 1, &cfg.limits)?;
            let scalar = if yh.is_empty() { None } else { Some(scalar_certificate(&yh, beta, eps)) };
            let diff = match (matrix.min_eigenvalue, scalar) {
                (Some(a), Some(b)) => Some((a - b).abs()),
                (None, None) => Some(0.0),
                _ => None,
            };
            Ok(json!({ "i": i, "d": d, "n": n, "count": yh.len(), "matrix": matrix.min_eigenvalue, "scalar": scalar, "abs_diff": diff, "pass": diff.is_some_and(|x| x <= TOL) }))
        })
        .collect::<Result<_, TesterError>>()?;
    let agree = rows.iter().filter(|r| r["pass"] == true).count();
    let worst = rows.iter().filter_map(|r| r["abs_diff"].as_f64()).fold(0.0, f64::max);
    Ok((agree == rows.len(), format!("{agree}/{} datasets agree, worst difference {worst:.3e}", rows.len()), json!({ "tolerance": TOL, "datasets": rows })))
}

/// Moment matching bounds low-degree expectations on the passing slice.
pub(super) fn criterion_moment_transfer(cfg: &SuiteConfig) -> Result<Outcome, TesterError> {
    const L: usize = 2;
    const TAU_M: f64 = 0.1;
    const SLACK: f64 = 1.1;
    let seed = cfg.criterion_seed(8);
    let slice = Slice { lo: -0.25, hi: 0.25, index: 1 };
    let rows: Vec<serde_json::Value> = (0..20u64)
        .into_par_iter()
        .map(|i| {
            let target = planted_target(D, 0.5, derive_seed(seed, i));
            let model = MassartModel::constant(target.clone(), 0.1);
            // Every other distribution carries a mild skew orthogonal to the target.
            let generator = if i % 2 == 0 {
                Generator::Massart { d: D, n: 50_000, model }
            } else {
                Generator::OrthogonalSkew { d: D, n: 50_000, model, slice: Interval { lo: slice.lo, hi: slice.hi }, deviation: 0.02 }
            };
            let data = generator.generate(derive_seed(seed, 100 + i), &cfg.limits)?;
            let basis = orthobasis(&target.v)?;
            let m = moment_test(&data, &target.v, &slice, &basis, L, TAU_M, 1, &cfg.limits)?;
            let tau_hat = m.max_moment_dev.unwrap_or(0.0);
            let bound = SLACK * tau_hat * (D as f64).powi(L as i32);
            let indices = enumerate_multi_indices(D - 1, L, cfg.limits.matrix_dim_cap)?;
            let z: Vec<Vec<f64>> = data
                .rows()
                .filter(|x| slice.contains(dot(&target.v, x)))
                .map(|x| (0..D - 1).map(|j| basis.column(j).iter().zip(x).map(|(a, b)| a * b).sum()).collect())
                .collect();
            let mut worst = 0.0f64;
            for q in 0..20u64 {
                let raw = sample_gaussian(indices.len(), 1, derive_seed(seed, 10_000 + 100 * i + q));
                let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
                let a: Vec<f64> = raw.iter().map(|c| c / norm).collect();
                let mut mean = 0.0;
                for zi in &z {
                    let mut p = 0.0;
                    for (c, alpha) in a.iter().zip(&indices) {
                        p += c * hermite_tensor_eval(alpha, zi)?;
                    }
                    mean += p;
                }
                mean /= z.len() as f64;
                // The constant index comes first, and E_N p is its coefficient.
                worst = worst.max((mean - a[0]).abs());
            }
            Ok(json!({ "i": i, "skewed": i % 2 == 1, "count": z.len(), "moment_pass": m.pass, "tau_hat": tau_hat, "bound": bound, "max_discrepancy": worst, "pass": m.pass && worst <= bound }))
        })
        .collect::<Result<_, TesterError>>()?;
    let passing = rows.iter().filter(|r| r["moment_pass"] == true).count();
    let ok = rows.iter().filter(|r| r["pass"] == true).count();
    let worst_ratio = rows
        .iter()
        .filter_map(|r| Some(r["max_discrepancy"].as_f64()? / r["bound"].as_f64()?))
        .fold(0.0, f64::max);
    let summary = format!("{ok}/{} distributions within bound ({passing} passed the moment test), worst discrepancy/bound {worst_ratio:.3}", rows.len());
    Ok((ok == rows.len(), summary, json!({ "l": L, "tau_m": TAU_M, "slack": SLACK, "polynomials_per_distribution": 20, "distributions": rows })))
}

const BA_EPSILON: f64 = 0.1;

/// The bias-agnostic profile against a planted `gamma_star`, with `eta = 0.1`
/// and the Chow-sweep learner.
pub fn bias_agnostic_experiment(gamma_star: f64, direction_seed: u64) -> BiasAgnosticExperiment {
    let target = planted_target(D, gamma_star, direction_seed);
    BiasAgnosticExperiment {
        generator: Generator::Massart { d: D, n: 1, model: MassartModel::constant(target, 0.1) },
        config: BiasAgnosticConfig {
            epsilon: BA_EPSILON,
            delta: DELTA,
            eta: 0.1,
            overrides: Overrides { l: Some(2), n: Some(200_000), delta_slice: Some(0.25), tau_p: Some(0.02), tau_m: Some(0.05), psd_tol: Some(BA_EPSILON), ..Default::default() },
            learner: LearnerSpec { kind: LearnerKind::ChowSweep, gamma: 0.5, epsilon_prime: 0.0, config: Default::default() },
            max_iterations: 40,
        },
        eval_n: 20_000,
        opt_dirs: 1000,
    }
}

pub(super) fn criterion_bias_agnostic(cfg: &SuiteConfig) -> Result<Outcome, ExperimentError> {
    let need = (cfg.trials * 9).div_ceil(10);
    let mut pass = true;
    let mut parts = Vec::new();
    let mut groups = Vec::new();
    for (j, gs) in [0.25, 0.1].into_iter().enumerate() {
        let base = derive_seed(cfg.criterion_seed(9), j as u64);
        // A fresh planted direction per trial.
        let trials: Vec<BiasAgnosticTrial> = (0..cfg.trials)
            .into_par_iter()
            .map(|i| {
                let seed = derive_seed(base, i as u64);
                bias_agnostic_experiment(gs, derive_seed(seed, 0)).run_trial(i, seed, &cfg.limits)
            })
            .collect::<Result<_, _>>()?;
        let terminated = trials.iter().filter(|t| t.termination == Some(Termination::StopRule)).count();
        let within = trials.iter().filter(|t| t.within).count();
        let ok = terminated == trials.len() && within >= need;
        pass &= ok;
        parts.push(format!("bias {gs}: {terminated}/{} stopped, {within} within opt + {BA_EPSILON}", trials.len()));
        groups.push(json!({ "gamma_star": gs, "terminated": terminated, "within": within, "pass": ok, "trials": trials }));
    }
    Ok((pass, parts.join("; "), json!({ "epsilon": BA_EPSILON, "required_within": need, "groups": groups })))
}
