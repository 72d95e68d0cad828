use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{dot, Dataset, Halfspace};
use crate::learner::Learner;
use crate::limits::Limits;
use crate::poly::enumerate_multi_indices;

use super::checks::{certificate_check, mass_check, moment_check};
use super::orthobasis::orthobasis;
use super::params::TesterParams;
use super::slices::{build_slices, slice_position, Slice};
use super::TesterError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RejectCause {
    Mass { slice: usize, deviation: f64 },
    Moment { slice: usize, alpha: Vec<usize>, deviation: f64 },
    Certificate { slice: usize, min_eigenvalue: f64 },
}

impl RejectCause {
    pub fn kind(&self) -> &'static str {
        match self {
            RejectCause::Mass { .. } => "mass",
            RejectCause::Moment { .. } => "moment",
            RejectCause::Certificate { .. } => "certificate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceReport {
    pub slice: Slice,
    pub count: usize,
    pub empirical_mass: f64,
    pub gaussian_mass: f64,
    pub mass_deviation: f64,
    pub mass_pass: bool,
    /// Absent when the slice is too thin to test.
    pub max_moment_dev: Option<f64>,
    pub moment_pass: bool,
    pub min_eigenvalue: Option<f64>,
    pub certificate_pass: bool,
    pub skipped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hypothesis: Option<Halfspace>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reject_cause: Option<RejectCause>,
    pub per_slice: Vec<SliceReport>,
    /// Error of the learned halfspace on the phase-two sample.
    pub empirical_error: f64,
    pub opt_reference: Option<f64>,
    pub learner: String,
    pub n_phase1: usize,
    pub n_phase2: usize,
}

/// Phase-two rows grouped by slice, with `U^T x` and `y h(x)` precomputed.
pub struct SliceData {
    pub slices: Vec<Slice>,
    /// Per slice: row-major `d - 1` wide projections.
    pub u: Vec<Vec<f64>>,
    pub yh: Vec<Vec<f64>>,
}

pub fn bucket(data: &Dataset, h: &Halfspace, slices: Vec<Slice>) -> Result<SliceData, TesterError> {
    let basis = orthobasis(&h.v)?;
    let dim = data.d - 1;
    let rows: Vec<(usize, Vec<f64>, f64)> = data
        .x
        .par_chunks(data.d)
        .zip(data.y.par_iter())
        .map(|(row, &y)| {
            let pos = slice_position(&slices, dot(&h.v, row));
            let u: Vec<f64> = (0..dim).map(|j| basis.column(j).iter().zip(row).map(|(a, b)| a * b).sum()).collect();
            (pos, u, f64::from(y * h.classify(row)))
        })
        .collect();
    let mut u = vec![Vec::new(); slices.len()];
    let mut yh = vec![Vec::new(); slices.len()];
    for (pos, row_u, w) in rows {
        u[pos].extend_from_slice(&row_u);
        yh[pos].push(w);
    }
    Ok(SliceData { slices, u, yh })
}

/// Algorithm driver: learn on phase one, test on phase two, and report the
/// first failing check in (slice, mass, moment, certificate) order.
pub fn run_tester(learner: &dyn Learner, phase1: &Dataset, phase2: &Dataset, params: &TesterParams, limits: &Limits) -> Result<TestReport, TesterError> {
    params.validate()?;
    for data in [phase1, phase2] {
        data.validate()?;
        if data.n == 0 || data.d != params.d {
            return Err(TesterError::InvalidParams(format!("datasets must be nonempty with d = {}, got n = {}, d = {}", params.d, data.n, data.d)));
        }
    }
    let h = learner.learn(phase1)?;
    if h.dim() != params.d || h.validate().is_err() {
        return Err(TesterError::InvalidParams(format!("learner returned a non-unit or {}-dimensional hypothesis", h.dim())));
    }
    let slices = build_slices(params.epsilon, params.delta_slice, params.range_constant)?;
    let sd = bucket(phase2, &h, slices)?;
    let indices = enumerate_multi_indices(params.d - 1, params.l, limits.matrix_dim_cap)?;
    let dim = params.d - 1;
    let results: Vec<(SliceReport, Option<RejectCause>)> = sd
        .slices
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let (u, yh) = (&sd.u[i], &sd.yh[i]);
            let mass = mass_check(yh.len(), phase2.n, s.gaussian_mass(), params.tau_p);
            let mom = moment_check(u, dim, &indices, params.l, params.tau_m, params.min_count);
            let cert = certificate_check(u, dim, yh, &indices, params.l, params.beta, params.epsilon, params.psd_tol, params.min_count)?;
            let cause = if !mass.pass {
                Some(RejectCause::Mass { slice: s.index, deviation: mass.deviation })
            } else if let Some((a, dev)) = &mom.first_failure {
                Some(RejectCause::Moment { slice: s.index, alpha: a.entries.clone(), deviation: *dev })
            } else if !cert.pass {
                Some(RejectCause::Certificate { slice: s.index, min_eigenvalue: cert.min_eigenvalue.unwrap_or(f64::NAN) })
            } else {
                None
            };
            let report = SliceReport {
                slice: *s,
                count: yh.len(),
                empirical_mass: mass.empirical_mass,
                gaussian_mass: mass.gaussian_mass,
                mass_deviation: mass.deviation,
                mass_pass: mass.pass,
                max_moment_dev: mom.max_moment_dev,
                moment_pass: mom.pass,
                min_eigenvalue: cert.min_eigenvalue,
                certificate_pass: cert.pass,
                skipped: mom.skipped || cert.skipped,
            };
            Ok((report, cause))
        })
        .collect::<Result<Vec<_>, TesterError>>()?;
    let reject_cause = results.iter().find_map(|(_, c)| c.clone());
    let per_slice: Vec<SliceReport> = results.into_iter().map(|(r, _)| r).collect();
    let verdict = if reject_cause.is_some() { Verdict::Reject } else { Verdict::Accept };
    Ok(TestReport {
        verdict,
        hypothesis: (verdict == Verdict::Accept).then(|| h.clone()),
        reject_cause,
        per_slice,
        empirical_error: phase2.error_of(&h),
        opt_reference: None,
        learner: learner.name(),
        n_phase1: phase1.n,
        n_phase2: phase2.n,
    })
}

/// Rows of `data` inside `slice` along `h.v`, as `(U^T x, y h(x))`.
fn slice_rows(data: &Dataset, h: &Halfspace, basis: &nalgebra::DMatrix<f64>, slice: &Slice) -> (Vec<f64>, Vec<f64>) {
    let mut u = Vec::new();
    let mut yh = Vec::new();
    for (row, &y) in data.rows().zip(&data.y) {
        if slice.contains(dot(&h.v, row)) {
            u.extend((0..basis.ncols()).map(|j| basis.column(j).iter().zip(row).map(|(a, b)| a * b).sum::<f64>()));
            yh.push(f64::from(y * h.classify(row)));
        }
    }
    (u, yh)
}

/// Slice mass test on every slice along `w`.
pub fn slice_mass_test(data: &Dataset, w: &[f64], slices: &[Slice], tau_p: f64) -> Vec<super::MassOutcome> {
    let mut counts = vec![0usize; slices.len()];
    for row in data.rows() {
        counts[slice_position(slices, dot(w, row))] += 1;
    }
    slices.iter().zip(counts).map(|(s, c)| mass_check(c, data.n, s.gaussian_mass(), tau_p)).collect()
}

/// Orthogonal moment test on one slice along `w`, with `basis = orthobasis(w)`.
#[allow(clippy::too_many_arguments)]
pub fn moment_test(data: &Dataset, w: &[f64], slice: &Slice, basis: &nalgebra::DMatrix<f64>, l: usize, tau_m: f64, min_count: usize, limits: &Limits) -> Result<super::MomentOutcome, TesterError> {
    let h = Halfspace { v: w.to_vec(), t: 0.0 };
    let (u, _) = slice_rows(data, &h, basis, slice);
    let indices = enumerate_multi_indices(data.d - 1, l, limits.matrix_dim_cap)?;
    Ok(moment_check(&u, data.d - 1, &indices, l, tau_m, min_count))
}

/// Non-negativity certificate on one slice along `h.v`.
#[allow(clippy::too_many_arguments)]
pub fn nonneg_certificate(data: &Dataset, slice: &Slice, h: &Halfspace, basis: &nalgebra::DMatrix<f64>, l: usize, beta: f64, epsilon: f64, psd_tol: f64, min_count: usize, limits: &Limits) -> Result<super::CertificateOutcome, TesterError> {
    let (u, yh) = slice_rows(data, h, basis, slice);
    let indices = enumerate_multi_indices(data.d - 1, l, limits.matrix_dim_cap)?;
    certificate_check(&u, data.d - 1, &yh, &indices, l, beta, epsilon, psd_tol, min_count)
}
