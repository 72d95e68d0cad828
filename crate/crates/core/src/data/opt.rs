use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::special::normal_quantile;

use super::dataset::Dataset;
use super::halfspace::{dot, Halfspace};
use super::rng::{domain, stream_rng};
use super::DataError;

/// Largest `|t|` whose threshold still has bias at least `gamma`.
pub fn bias_radius(gamma: f64) -> f64 {
    if gamma >= 0.5 {
        0.0
    } else {
        -normal_quantile(gamma)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Representative threshold of the winning cell.
    pub threshold: f64,
    pub errors: usize,
    /// The winner predicts `+1` below the threshold, i.e. uses `-u`.
    pub flipped: bool,
}

/// Best threshold for projections `z` over the `n + 1` cells between sorted
/// projections, restricted to cells that meet `[-T, T]` with
/// `T = bias_radius(gamma)`. Each cell is represented by its midpoint when
/// that lies in `[-T, T]`, otherwise by the midpoint of its intersection
/// with `[-T, T]`. Ties go to the smaller `|threshold|`, then the unflipped
/// orientation, then the lower cell.
pub fn sweep_thresholds(z: &[f64], y: &[i8], gamma: f64, both_orientations: bool) -> SweepResult {
    let n = z.len();
    let cap = bias_radius(gamma);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
    let pos_total = y.iter().filter(|v| **v == 1).count();
    let mut best: Option<(usize, f64, bool, usize)> = None;
    let mut pos_below = 0usize;
    for j in 0..=n {
        if j > 0 && y[order[j - 1]] == 1 {
            pos_below += 1;
        }
        let lo = if j == 0 { f64::NEG_INFINITY } else { z[order[j - 1]] };
        let hi = if j == n { f64::INFINITY } else { z[order[j]] };
        if lo >= hi || lo > cap || hi < -cap {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let rep = if mid.is_finite() && mid.abs() <= cap { mid } else { 0.5 * (lo.max(-cap) + hi.min(cap)) };
        // Below the threshold predicts -1: errors are positives below plus
        // negatives above.
        let neg_above = (n - pos_total) - (j - pos_below);
        let errs = pos_below + neg_above;
        let mut consider = |errors: usize, threshold: f64, flipped: bool| {
            let better = match best {
                None => true,
                Some((e, t, f, _)) => (errors, threshold.abs(), flipped) < (e, t.abs(), f),
            };
            if better {
                best = Some((errors, threshold, flipped, j));
            }
        };
        consider(errs, rep, false);
        if both_orientations {
            consider(n - errs, rep, true);
        }
    }
    let (errors, threshold, flipped, _) = best.expect("the cells cover the line, so one meets [-T, T]");
    SweepResult { threshold, errors, flipped }
}

/// Hypothesis for a sweep along `u`.
pub fn sweep_hypothesis(u: &[f64], r: &SweepResult) -> Halfspace {
    if r.flipped {
        Halfspace { v: u.iter().map(|a| -a).collect(), t: -r.threshold }
    } else {
        Halfspace { v: u.to_vec(), t: r.threshold }
    }
}

pub fn project(data: &Dataset, u: &[f64]) -> Vec<f64> {
    data.x.par_chunks(data.d).map(|row| dot(u, row)).collect()
}

/// Smallest empirical error of a `gamma`-biased halfspace over `n_dirs`
/// random directions, plus the planted target direction when the
/// provenance records one. Both orientations of each direction are swept.
pub fn opt_error_bruteforce(data: &Dataset, gamma: f64, n_dirs: usize, seed: u64) -> Result<f64, DataError> {
    if !(gamma > 0.0 && gamma <= 0.5) {
        return Err(DataError::InvalidParams(format!("gamma must lie in (0, 1/2], got {gamma}")));
    }
    data.validate()?;
    let d = data.d;
    let mut dirs: Vec<Vec<f64>> = (0..n_dirs)
        .map(|i| {
            let mut rng = stream_rng(seed, domain::DIRECTIONS, i as u64);
            let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt();
            g.into_iter().map(|a| a / norm).collect()
        })
        .collect();
    if let Some(h) = data.planted_target() {
        dirs.push(h.v);
    }
    let best = dirs
        .iter()
        .map(|u| {
            let z = project(data, u);
            sweep_thresholds(&z, &data.y, gamma, true).errors
        })
        .min()
        .unwrap_or(data.n);
    Ok(best as f64 / data.n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(z: &[f64], y: &[i8], t: f64, flipped: bool) -> usize {
        z.iter()
            .zip(y)
            .filter(|(z, y)| {
                let pred = if (**z >= t) != flipped { 1 } else { -1 };
                pred != **y
            })
            .count()
    }

    #[test]
    fn separable_sweep_is_perfect() {
        let z = [-2.0, -1.0, 0.5, 1.5];
        let y = [-1, -1, 1, 1];
        let r = sweep_thresholds(&z, &y, 0.01, true);
        assert_eq!(r.errors, 0);
        assert_eq!(r.threshold, -0.25);
        assert!(!r.flipped);
    }

    #[test]
    fn half_bias_forces_the_origin_cell() {
        let z = [-2.0, -1.0, 0.5, 1.5];
        let y = [-1, -1, -1, 1];
        let r = sweep_thresholds(&z, &y, 0.5, false);
        assert_eq!(r.threshold, 0.0);
        assert_eq!(r.errors, 1);
    }

    proptest! {
        #[test]
        fn sweep_matches_exhaustive_resweep(z in prop::collection::vec(-3.0f64..3.0, 1..40), seed in 0u64..1000, gamma in 0.01f64..0.5) {
            let y: Vec<i8> = z.iter().enumerate().map(|(i, _)| if (seed >> (i % 10)) & 1 == 1 { 1 } else { -1 }).collect();
            let r = sweep_thresholds(&z, &y, gamma, true);
            let cap = bias_radius(gamma);
            prop_assert!(r.threshold.abs() <= cap + 1e-12);
            prop_assert_eq!(brute(&z, &y, r.threshold, r.flipped), r.errors);
            // Every representable feasible threshold does no better.
            let mut cands: Vec<f64> = z.clone();
            cands.extend([-cap, cap]);
            cands.sort_by(f64::total_cmp);
            for w in cands.windows(2) {
                let t = 0.5 * (w[0] + w[1]);
                if t.abs() <= cap && !z.contains(&t) {
                    prop_assert!(brute(&z, &y, t, false) >= r.errors);
                    prop_assert!(brute(&z, &y, t, true) >= r.errors);
                }
            }
        }
    }
}
