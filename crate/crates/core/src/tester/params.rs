use serde::{Deserialize, Serialize};

use crate::limits::Limits;
use crate::poly::multi_index_count;

use super::TesterError;

/// Values the schedule would use with no overrides. They overflow to
/// infinity (serialized as `null`) long before they become affordable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalSchedule {
    pub l: f64,
    pub eps_prime: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub log10_n: f64,
    #[serde(rename = "Delta_slice")]
    pub delta_slice: f64,
    pub tau_p: f64,
    pub tau_m: f64,
}

/// Every effective field of [`TesterParams`] can be pinned here.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_prime: Option<f64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "Delta_slice", skip_serializing_if = "Option::is_none")]
    pub delta_slice: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psd_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule_constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range_constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_count: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TesterParams {
    pub d: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub eta: f64,
    pub gamma: f64,
    pub beta: f64,
    pub l: usize,
    pub eps_prime: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Delta_slice")]
    pub delta_slice: f64,
    pub tau_p: f64,
    pub tau_m: f64,
    pub psd_tol: f64,
    pub schedule_constant: f64,
    /// The `C` of the outermost breakpoint `-C sqrt(log(1/eps))`.
    pub range_constant: f64,
    /// Slices with fewer phase-two samples skip the moment and certificate tests.
    pub min_count: usize,
    pub epsilon_in: f64,
    pub gamma_in: f64,
    pub theoretical: TheoreticalSchedule,
    pub overrides: Overrides,
}

pub const DEFAULT_SCHEDULE_CONSTANT: f64 = 1.0;
pub const DEFAULT_MIN_COUNT: usize = 50;

/// Clamps the inputs, computes the theoretical schedule and applies `overrides`.
pub fn schedule(epsilon: f64, delta: f64, eta: f64, gamma: f64, d: usize, overrides: &Overrides, limits: &Limits) -> Result<TesterParams, TesterError> {
    let bad = |m: String| Err(TesterError::InvalidParams(m));
    if !(0.0..0.5).contains(&eta) {
        return bad(format!("eta must lie in [0, 1/2), got {eta}"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return bad(format!("epsilon must lie in (0, 1), got {epsilon}"));
    }
    if !(gamma > 0.0 && gamma <= 0.5) {
        return bad(format!("gamma must lie in (0, 1/2], got {gamma}"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return bad(format!("delta must lie in (0, 1), got {delta}"));
    }
    if d < 2 {
        return bad(format!("dimension must be at least 2, got {d}"));
    }
    let beta = 1.0 - 2.0 * eta;
    let gamma_eff = gamma.max(epsilon).min(beta);
    let eps = epsilon.min(beta / 2.0);

    let c = overrides.schedule_constant.unwrap_or(DEFAULT_SCHEDULE_CONSTANT);
    if !(c > 0.0 && c.is_finite()) {
        return bad(format!("schedule_constant must be positive, got {c}"));
    }
    let lg = (1.0 / gamma_eff).ln();
    let lb = (1.0 / beta).ln();
    let l_theory = (c * lg.powi(3) * lb.powi(2) / (beta * beta)).ceil();
    let df = d as f64;
    let log10_n = c * l_theory * df.log10() - 2.0 * c * eps.log10();
    let theoretical = TheoreticalSchedule {
        l: l_theory,
        eps_prime: eps.powf(c) / 3f64.powf(l_theory),
        n: 10f64.powf(log10_n),
        log10_n,
        delta_slice: eps * eps,
        tau_p: eps.powf(c) / df.powf(l_theory),
        tau_m: eps.powf(c) / df.powf(l_theory),
    };

    let l = match overrides.l {
        Some(l) => l,
        None => {
            let dim = multi_index_count(d - 1, l_theory as usize);
            if dim > limits.matrix_dim_cap {
                return bad(format!("theoretical degree l = {l_theory} gives moment matrices of side {dim}, over the cap {}; override l", limits.matrix_dim_cap));
            }
            l_theory as usize
        }
    };
    let dim = multi_index_count(d - 1, l);
    if dim > limits.matrix_dim_cap {
        return bad(format!("l = {l} gives moment matrices of side {dim}, over the cap {}", limits.matrix_dim_cap));
    }
    let n = match overrides.n {
        Some(n) => n,
        None if theoretical.n <= limits.sample_cap as f64 => theoretical.n.ceil() as usize,
        None => return bad(format!("theoretical sample budget N = 10^{log10_n:.1} exceeds the cap {}; override N", limits.sample_cap)),
    };
    if n == 0 || n > limits.sample_cap {
        return bad(format!("N = {n} must lie in [1, {}]", limits.sample_cap));
    }
    let params = TesterParams {
        d,
        epsilon: eps,
        delta,
        eta,
        gamma: gamma_eff,
        beta,
        l,
        eps_prime: overrides.eps_prime.unwrap_or(theoretical.eps_prime),
        n,
        delta_slice: overrides.delta_slice.unwrap_or(theoretical.delta_slice),
        tau_p: overrides.tau_p.unwrap_or(theoretical.tau_p),
        tau_m: overrides.tau_m.unwrap_or(theoretical.tau_m),
        psd_tol: overrides.psd_tol.unwrap_or(eps),
        schedule_constant: c,
        range_constant: overrides.range_constant.unwrap_or(c),
        min_count: overrides.min_count.unwrap_or(DEFAULT_MIN_COUNT),
        epsilon_in: epsilon,
        gamma_in: gamma,
        theoretical,
        overrides: overrides.clone(),
    };
    params.validate()?;
    Ok(params)
}

impl TesterParams {
    pub fn validate(&self) -> Result<(), TesterError> {
        let positive = [
            ("eps_prime", self.eps_prime),
            ("Delta_slice", self.delta_slice),
            ("tau_p", self.tau_p),
            ("tau_m", self.tau_m),
            ("psd_tol", self.psd_tol),
            ("range_constant", self.range_constant),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(TesterError::InvalidParams(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}
