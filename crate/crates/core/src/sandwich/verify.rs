use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::poly::gaussian_expectation;
use crate::quadrature::{gaussian_expectation_quadrature, QuadratureOptions};
use crate::scalar::Scalar;
use crate::special::gaussian_tail;

use super::construct::SandwichPair;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyOptions {
    /// Uniform grid points on `[-range_mult*B, range_mult*B]`.
    pub grid_size: usize,
    pub range_mult: f64,
    /// Log-spaced points per side from `range_mult*B` out to `tail_mult*B`.
    pub tail_points_per_side: usize,
    pub tail_mult: f64,
    /// Largest tolerated pointwise violation.
    pub slack: f64,
    /// Also integrate the gap by quadrature.
    pub quadrature: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { grid_size: 10_000, range_mult: 3.0, tail_points_per_side: 50, tail_mult: 10.0, slack: 1e-30, quadrature: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub t: f64,
    pub alpha: f64,
    pub m: usize,
    pub k: usize,
    #[serde(rename = "B")]
    pub b: f64,
    pub w: f64,
    pub delta_bump: f64,
    pub degree: usize,
    pub gap_ratio: f64,
    pub max_violation: f64,
    pub pass: bool,
    pub pointwise_pass: bool,
    pub gap_pass: bool,
    /// `E[p_+ - p_-]` from exact moments.
    pub gap_expectation: f64,
    /// `Pr[x >= t]`.
    pub gaussian_mass: f64,
    /// `E[p_+ - p_-]` by quadrature, when requested.
    pub gap_quadrature: Option<f64>,
    pub quadrature_rel_diff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub quadrature_error: Option<String>,
    /// Smallest sampled `p_+ - p_-`.
    pub min_pointwise_gap: f64,
    pub points_checked: usize,
    pub reflected: bool,
    pub precision_bits: usize,
}

/// Sample points for the pointwise check: the uniform grid, the log-spaced
/// tails and the threshold itself.
pub fn verification_points(pair: &SandwichPair, opts: &VerifyOptions) -> Vec<f64> {
    let b = pair.params.b;
    let r = opts.range_mult * b;
    let mut xs: Vec<f64> = (0..opts.grid_size)
        .map(|i| if opts.grid_size == 1 { 0.0 } else { -r + 2.0 * r * i as f64 / (opts.grid_size - 1) as f64 })
        .collect();
    let far = opts.tail_mult * b;
    if opts.tail_points_per_side > 0 && far > r {
        let n = opts.tail_points_per_side;
        let ratio = far / r;
        for i in 1..=n {
            let x = r * ratio.powf(i as f64 / n as f64);
            xs.push(x);
            xs.push(-x);
        }
    }
    xs.push(pair.threshold);
    xs
}

/// Certifies pointwise domination on [`verification_points`] and the
/// multiplicative gap `E[p_+ - p_-] / Pr[x >= t] <= alpha`.
pub fn verify_pair(pair: &SandwichPair, opts: &VerifyOptions) -> VerificationReport {
    let prec = pair.precision;
    let t = pair.threshold;
    let xs = verification_points(pair, opts);
    let per_point: Vec<(f64, f64)> = xs
        .par_iter()
        .map(|&x| {
            let sx = Scalar::from_f64(x, prec);
            let lo = pair.p_minus.eval(&sx);
            let hi = pair.p_plus.eval(&sx);
            let h = if x >= t { Scalar::one(prec) } else { Scalar::zero(prec) };
            let below = (&lo - &h).to_f64();
            let above = (&h - &hi).to_f64();
            (below.max(above), (&hi - &lo).to_f64())
        })
        .collect();
    let max_violation = per_point.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let min_pointwise_gap = per_point.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let pointwise_pass = max_violation <= opts.slack;

    let gap_poly = pair.p_plus.sub(&pair.p_minus);
    let gap = gaussian_expectation(&gap_poly);
    let mass = gaussian_tail(&Scalar::from_f64(t, prec));
    let ratio = &gap / &mass;
    let gap_pass = ratio <= Scalar::from_f64(pair.params.alpha, prec);

    let (mut gap_quadrature, mut quadrature_rel_diff, mut quadrature_error) = (None, None, None);
    if opts.quadrature {
        match gaussian_expectation_quadrature(&gap_poly, &QuadratureOptions { precision: prec, ..Default::default() }) {
            Ok(q) => {
                quadrature_rel_diff = Some(((&q - &gap) / gap.clone()).abs().to_f64());
                gap_quadrature = Some(q.to_f64());
            }
            Err(e) => quadrature_error = Some(e.to_string()),
        }
    }

    let s = pair.summary();
    VerificationReport {
        t,
        alpha: s.alpha,
        m: s.m,
        k: s.k,
        b: s.b,
        w: s.w,
        delta_bump: s.delta_bump,
        degree: s.degree,
        gap_ratio: ratio.to_f64(),
        max_violation,
        pass: pointwise_pass && gap_pass,
        pointwise_pass,
        gap_pass,
        gap_expectation: gap.to_f64(),
        gaussian_mass: mass.to_f64(),
        gap_quadrature,
        quadrature_rel_diff,
        quadrature_error,
        min_pointwise_gap,
        points_checked: xs.len(),
        reflected: pair.reflected,
        precision_bits: prec,
    }
}
