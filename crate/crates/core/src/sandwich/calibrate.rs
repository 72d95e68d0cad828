use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::limits::Limits;

use super::construct::build_sandwich;
use super::params::{select_params, SandwichConstants};
use super::verify::{verify_pair, VerifyOptions};
use super::SandwichError;

/// Which properties a candidate must satisfy on every grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationTarget {
    /// Pointwise domination and the multiplicative gap.
    Full,
    /// Pointwise domination only.
    Pointwise,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationOptions {
    pub target: CalibrationTarget,
    pub verify: VerifyOptions,
    /// Candidates whose schedule exceeds this degree on any cell fail without
    /// being built.
    pub max_degree: usize,
    pub doubling_steps: usize,
    pub bisection_steps: usize,
    pub start: SandwichConstants,
    pub limits: Limits,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            target: CalibrationTarget::Pointwise,
            verify: VerifyOptions::default(),
            max_degree: 3000,
            doubling_steps: 24,
            bisection_steps: 10,
            start: SandwichConstants { c0: 0.5, c1: 2.0, cw: 2.0, ck: 0.5, cm: 1.0 / 1024.0, cb: 0.5, ccorr: 0.125 },
            limits: Limits::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalibrationOutcome {
    pub constants: SandwichConstants,
    /// Number of candidate constant vectors evaluated.
    pub evaluations: usize,
}

struct Failure {
    t: f64,
    alpha: f64,
    reason: String,
    /// The schedule itself is too large, as opposed to a failed check.
    over_budget: bool,
}

/// First failing cell for a candidate, or `None` if every cell passes.
fn first_failure(consts: &SandwichConstants, cells: &[(f64, f64)], opts: &CalibrationOptions) -> Option<Failure> {
    // Schedule screen first: it is cheap and keeps the search away from
    // degrees it cannot afford to build.
    for &(t, a) in cells {
        let fail = |reason: String, over_budget| Some(Failure { t, alpha: a, reason, over_budget });
        match select_params(t.abs(), a, consts, &opts.limits) {
            Err(e @ SandwichError::DegreeCap { .. }) => return fail(e.to_string(), true),
            Err(e) => return fail(e.to_string(), false),
            Ok(p) if p.degree_bound() > opts.max_degree => {
                return fail(format!("degree {} exceeds calibration budget {}", p.degree_bound(), opts.max_degree), true)
            }
            Ok(_) => {}
        }
    }
    let results: Vec<Option<String>> = cells
        .par_iter()
        .map(|&(t, a)| {
            let pair = match build_sandwich(t, a, consts, &opts.limits) {
                Ok(p) => p,
                Err(e) => return Some(e.to_string()),
            };
            let report = verify_pair(&pair, &opts.verify);
            if !report.pointwise_pass {
                return Some(format!("pointwise violation {:e}", report.max_violation));
            }
            if opts.target == CalibrationTarget::Full && !report.gap_pass {
                return Some(format!("gap ratio {:.6} exceeds alpha {}", report.gap_ratio, a));
            }
            None
        })
        .collect();
    cells
        .iter()
        .zip(results)
        .find_map(|(&(t, alpha), r)| r.map(|reason| Failure { t, alpha, reason, over_budget: false }))
}

/// Deterministic coordinate search: double every searched constant from
/// `opts.start` until the grid passes, then bisect `Ccorr`, `CB`, `Cm`, `Ck`
/// in that order, each between zero and its current value.
pub fn calibrate_constants(t_grid: &[f64], alpha_grid: &[f64], opts: &CalibrationOptions) -> Result<CalibrationOutcome, SandwichError> {
    if t_grid.is_empty() || alpha_grid.is_empty() {
        return Err(SandwichError::InvalidParams("calibration grids must be nonempty".into()));
    }
    if let Some(&a) = alpha_grid.iter().find(|a| !(**a > 0.0 && **a < 0.5)) {
        return Err(SandwichError::AlphaOutOfRange(a));
    }
    let cells: Vec<(f64, f64)> = t_grid.iter().flat_map(|&t| alpha_grid.iter().map(move |&a| (t, a))).collect();
    let mut evaluations = 0;
    let mut x = opts.start;
    let mut last_failure = None;
    let mut found = false;
    for _ in 0..=opts.doubling_steps {
        evaluations += 1;
        match first_failure(&x, &cells, opts) {
            None => {
                found = true;
                break;
            }
            Some(f) => {
                // Degrees only grow under doubling, so a budget failure is final.
                let stop = f.over_budget;
                last_failure = Some(f);
                if stop {
                    break;
                }
            }
        }
        x = SandwichConstants { ck: 2.0 * x.ck, cm: 2.0 * x.cm, cb: 2.0 * x.cb, ccorr: 2.0 * x.ccorr, ..x };
    }
    if !found {
        let f = last_failure.expect("at least one evaluation");
        return Err(SandwichError::Calibration { t: f.t, alpha: f.alpha, reason: f.reason });
    }
    type Field = fn(&mut SandwichConstants) -> &mut f64;
    let order: [Field; 4] = [|c| &mut c.ccorr, |c| &mut c.cb, |c| &mut c.cm, |c| &mut c.ck];
    for field in order {
        let mut lo = 0.0;
        let mut hi = *field(&mut x.clone());
        for _ in 0..opts.bisection_steps {
            let mid = 0.5 * (lo + hi);
            let mut cand = x;
            *field(&mut cand) = mid;
            evaluations += 1;
            if first_failure(&cand, &cells, opts).is_none() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        *field(&mut x) = hi;
    }
    Ok(CalibrationOutcome { constants: x, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> CalibrationOptions {
        CalibrationOptions {
            verify: VerifyOptions { grid_size: 1000, ..VerifyOptions::default() },
            bisection_steps: 4,
            ..CalibrationOptions::default()
        }
    }

    #[test]
    fn pointwise_calibration_passes_its_grid() {
        let opts = quick();
        let out = calibrate_constants(&[0.0], &[0.4], &opts).unwrap();
        assert!(first_failure(&out.constants, &[(0.0, 0.4)], &opts).is_none());
        // Monotone in the constants: a uniform 10% increase still passes.
        let bigger = out.constants.scaled(1.1);
        assert!(first_failure(&bigger, &[(0.0, 0.4)], &opts).is_none());
    }

    #[test]
    fn full_calibration_reports_the_failing_cell() {
        let opts = CalibrationOptions { target: CalibrationTarget::Full, max_degree: 400, ..quick() };
        match calibrate_constants(&[0.0], &[0.4], &opts) {
            Err(SandwichError::Calibration { t, alpha, .. }) => assert_eq!((t, alpha), (0.0, 0.4)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(calibrate_constants(&[], &[0.4], &quick()).is_err());
        assert!(calibrate_constants(&[0.0], &[0.6], &quick()).is_err());
    }
}
