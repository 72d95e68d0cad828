use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::sandwich::{build_sandwich, profile, verify_pair, SandwichError, VerificationReport, VerifyOptions};

use super::{Outcome, SuiteConfig};

pub const T_GRID: [f64; 5] = [-1.0, 0.0, 0.5, 1.0, 2.0];
pub const ALPHA_GRID: [f64; 2] = [0.4, 0.25];
pub const QUADRATURE_AGREEMENT: f64 = 1e-12;

pub(super) type Cell = VerificationReport;

pub fn grid_options() -> VerifyOptions {
    VerifyOptions { grid_size: 10_000, range_mult: 3.0, tail_points_per_side: 50, tail_mult: 10.0, slack: 1e-30, quadrature: true }
}

/// Builds and verifies every cell of the grid with the named profile.
pub fn grid_reports(profile_name: &str, limits: &crate::Limits, opts: &VerifyOptions) -> Result<Vec<VerificationReport>, SandwichError> {
    let consts = profile(profile_name)?;
    let cells: Vec<(f64, f64)> = T_GRID.iter().flat_map(|&t| ALPHA_GRID.iter().map(move |&a| (t, a))).collect();
    cells
        .par_iter()
        .map(|&(t, a)| {
            let pair = build_sandwich(t, a, &consts, limits)?;
            Ok(verify_pair(&pair, opts))
        })
        .collect()
}

pub(super) fn compute_grid(cfg: &SuiteConfig) -> Result<Vec<Cell>, SandwichError> {
    grid_reports(&cfg.profile, &cfg.limits, &grid_options())
}

pub(super) fn criterion_pointwise(cells: &[Cell]) -> Outcome {
    let bad: Vec<&Cell> = cells.iter().filter(|c| !c.pointwise_pass).collect();
    let worst = cells.iter().map(|c| c.max_violation).fold(f64::NEG_INFINITY, f64::max);
    let rows: Vec<serde_json::Value> = cells
        .iter()
        .map(|c| {
            serde_json::json!({
                "t": c.t, "alpha": c.alpha, "m": c.m, "k": c.k, "B": c.b, "degree": c.degree,
                "max_violation": c.max_violation, "min_pointwise_gap": c.min_pointwise_gap,
                "points_checked": c.points_checked, "precision_bits": c.precision_bits, "pass": c.pointwise_pass,
            })
        })
        .collect();
    let summary = format!("{}/{} cells dominate pointwise, worst violation {:.3e}", cells.len() - bad.len(), cells.len(), worst);
    (bad.is_empty(), summary, serde_json::json!({ "cells": rows }))
}

pub(super) fn criterion_gap(cells: &[Cell]) -> Outcome {
    let mut pass = true;
    let mut worst_ratio = 0.0f64;
    let rows: Vec<serde_json::Value> = cells
        .iter()
        .map(|c| {
            let agree = c.quadrature_rel_diff.is_some_and(|d| d <= QUADRATURE_AGREEMENT);
            pass &= c.gap_pass && agree;
            worst_ratio = worst_ratio.max(c.gap_ratio / c.alpha);
            serde_json::json!({
                "t": c.t, "alpha": c.alpha, "degree": c.degree, "gap_ratio": c.gap_ratio, "gap_pass": c.gap_pass,
                "gap_expectation": c.gap_expectation, "gap_quadrature": c.gap_quadrature,
                "quadrature_rel_diff": c.quadrature_rel_diff, "quadrature_error": c.quadrature_error, "agree": agree,
            })
        })
        .collect();
    let gap_ok = cells.iter().filter(|c| c.gap_pass).count();
    let agree = cells.iter().filter(|c| c.quadrature_rel_diff.is_some_and(|d| d <= QUADRATURE_AGREEMENT)).count();
    let summary = format!("{gap_ok}/{} cells within alpha (worst ratio/alpha {worst_ratio:.3}), {agree}/{} quadrature agreements", cells.len(), cells.len());
    (pass, summary, serde_json::json!({ "cells": rows }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeFit {
    /// Exponent of `|t| + 1`.
    pub t_exponent: f64,
    /// Exponent of `1 / alpha`.
    pub alpha_exponent: f64,
    pub log_constant: f64,
    /// `max degree / ((|t|+1)^6 log^2(1/alpha) / alpha^2)` over the cells.
    pub shape_constant: f64,
}

/// Least squares `log deg = c + a log(|t|+1) + b log(1/alpha)`.
pub fn degree_fit(points: &[(f64, f64, usize)]) -> DegreeFit {
    let n = points.len();
    let a = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => (points[i].0.abs() + 1.0).ln(),
        _ => (1.0 / points[i].1).ln(),
    });
    let b = DVector::from_iterator(n, points.iter().map(|p| (p.2 as f64).ln()));
    let sol = a.svd(true, true).solve(&b, 1e-12).expect("svd solve");
    let shape_constant = points
        .iter()
        .map(|&(t, al, deg)| deg as f64 / ((t.abs() + 1.0).powi(6) * (1.0 / al).ln().powi(2) / (al * al)))
        .fold(0.0, f64::max);
    DegreeFit { log_constant: sol[0], t_exponent: sol[1], alpha_exponent: sol[2], shape_constant }
}

pub(super) fn criterion_degree(cells: &[Cell]) -> Outcome {
    let pts: Vec<(f64, f64, usize)> = cells.iter().map(|c| (c.t, c.alpha, c.degree)).collect();
    let fit = degree_fit(&pts);
    let hard = fit.t_exponent <= 8.0 && fit.alpha_exponent <= 4.0;
    let within_shape = fit.t_exponent <= 12.0 && fit.alpha_exponent <= 4.0;
    let summary = format!(
        "degree ~ (|t|+1)^{:.2} (1/alpha)^{:.2}, shape constant {:.4}, within 2x shape: {within_shape}",
        fit.t_exponent, fit.alpha_exponent, fit.shape_constant
    );
    let degrees: Vec<serde_json::Value> = cells.iter().map(|c| serde_json::json!({ "t": c.t, "alpha": c.alpha, "m": c.m, "k": c.k, "degree": c.degree })).collect();
    (hard, summary, serde_json::json!({ "fit": fit, "within_shape": within_shape, "cells": degrees }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_a_power_law() {
        let mut pts = Vec::new();
        for &t in &[0.0, 0.5, 1.0, 2.0] {
            for &a in &[0.4f64, 0.25, 0.1] {
                let deg = 3.0 * (t + 1.0f64).powf(2.5) * (1.0f64 / a).powf(1.5);
                pts.push((t, a, deg.round() as usize));
            }
        }
        let f = degree_fit(&pts);
        assert!((f.t_exponent - 2.5).abs() < 0.05, "{f:?}");
        assert!((f.alpha_exponent - 1.5).abs() < 0.05, "{f:?}");
    }
}
