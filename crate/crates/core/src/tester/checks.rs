//! The three per-slice tests. Each works on the rows of one slice, given as
//! projections `u = U^T x` (row-major, `d - 1` wide) and the matching
//! weights `y h(x)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::poly::{hermite_normalized_f64, MultiIndex};

use super::TesterError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassOutcome {
    pub empirical_mass: f64,
    pub gaussian_mass: f64,
    pub deviation: f64,
    pub pass: bool,
}

/// Fails iff `|p_hat - mass| >= tau_p`.
pub fn mass_check(count: usize, n: usize, gaussian_mass: f64, tau_p: f64) -> MassOutcome {
    let empirical_mass = count as f64 / n as f64;
    let deviation = (empirical_mass - gaussian_mass).abs();
    MassOutcome { empirical_mass, gaussian_mass, deviation, pass: deviation < tau_p }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentOutcome {
    pub count: usize,
    pub skipped: bool,
    pub max_moment_dev: Option<f64>,
    /// First index in graded order whose deviation reaches `tau_m`.
    pub first_failure: Option<(MultiIndex, f64)>,
    pub pass: bool,
}

/// Values `He_j(u_i)` for `j <= l`, laid out `[i * (l + 1) + j]`.
fn hermite_table(u: &[f64], l: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(u.len() * (l + 1));
    let mut buf = Vec::new();
    for &x in u {
        hermite_normalized_f64(l, x, &mut buf);
        out.extend_from_slice(&buf[..=l]);
    }
    out
}

/// `H(u)` over `indices`, reusing a per-coordinate Hermite table.
fn hermite_vector(table: &[f64], l: usize, indices: &[MultiIndex], out: &mut Vec<f64>) {
    out.clear();
    for a in indices {
        let mut p = 1.0;
        for (i, &e) in a.entries.iter().enumerate() {
            if e > 0 {
                p *= table[i * (l + 1) + e];
            }
        }
        out.push(p);
    }
}

/// Compares every conditional moment with `1 <= |alpha| <= l` against its
/// Gaussian value, zero. `indices` must be the full graded list up to `l`.
pub fn moment_check(u: &[f64], dim: usize, indices: &[MultiIndex], l: usize, tau_m: f64, min_count: usize) -> MomentOutcome {
    let count = u.len().checked_div(dim).unwrap_or(0);
    if count < min_count || count == 0 || l == 0 {
        return MomentOutcome { count, skipped: count < min_count || count == 0, max_moment_dev: None, first_failure: None, pass: true };
    }
    let mut sums = vec![0.0; indices.len()];
    let mut h = Vec::with_capacity(indices.len());
    for row in u.chunks_exact(dim) {
        let table = hermite_table(row, l);
        hermite_vector(&table, l, indices, &mut h);
        for (s, v) in sums.iter_mut().zip(&h) {
            *s += v;
        }
    }
    let mut max_dev = 0.0f64;
    let mut first = None;
    for (a, s) in indices.iter().zip(&sums) {
        if a.total == 0 {
            continue;
        }
        let dev = (s / count as f64).abs();
        max_dev = max_dev.max(dev);
        if first.is_none() && dev >= tau_m {
            first = Some((a.clone(), dev));
        }
    }
    MomentOutcome { count, skipped: false, max_moment_dev: Some(max_dev), pass: first.is_none(), first_failure: first }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateOutcome {
    pub count: usize,
    pub skipped: bool,
    pub min_eigenvalue: Option<f64>,
    /// `|M q - lambda q| / |M|` for the minimal pair.
    pub residual: Option<f64>,
    pub pass: bool,
}

/// `M = mean(H(u) H(u)^T (y h(x) - beta + eps))` over the slice.
pub fn certificate_matrix(u: &[f64], dim: usize, yh: &[f64], indices: &[MultiIndex], l: usize, beta: f64, epsilon: f64) -> DMatrix<f64> {
    let k = indices.len();
    let mut m = DMatrix::<f64>::zeros(k, k);
    let mut h = Vec::with_capacity(k);
    for (row, w) in u.chunks_exact(dim.max(1)).zip(yh) {
        let table = hermite_table(row, l);
        hermite_vector(&table, l, indices, &mut h);
        let weight = w - beta + epsilon;
        for i in 0..k {
            let hi = h[i] * weight;
            for j in i..k {
                m[(i, j)] += hi * h[j];
            }
        }
    }
    let count = yh.len().max(1) as f64;
    for i in 0..k {
        for j in i..k {
            let v = m[(i, j)] / count;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

pub const RESIDUAL_TOL: f64 = 1e-8;

/// Passes iff `lambda_min(M) >= -psd_tol`.
#[allow(clippy::too_many_arguments)]
pub fn certificate_check(u: &[f64], dim: usize, yh: &[f64], indices: &[MultiIndex], l: usize, beta: f64, epsilon: f64, psd_tol: f64, min_count: usize) -> Result<CertificateOutcome, TesterError> {
    let count = yh.len();
    if count < min_count || count == 0 {
        return Ok(CertificateOutcome { count, skipped: true, min_eigenvalue: None, residual: None, pass: true });
    }
    let m = certificate_matrix(u, dim, yh, indices, l, beta, epsilon);
    let (lambda, residual) = min_eigenpair(&m)?;
    Ok(CertificateOutcome { count, skipped: false, min_eigenvalue: Some(lambda), residual: Some(residual), pass: lambda >= -psd_tol })
}

/// Smallest eigenvalue of a symmetric matrix with the relative residual of
/// its eigenvector; errors when the residual exceeds [`RESIDUAL_TOL`].
pub fn min_eigenpair(m: &DMatrix<f64>) -> Result<(f64, f64), TesterError> {
    let eig = SymmetricEigen::new(m.clone());
    let (i, &lambda) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty matrix");
    let q = eig.eigenvectors.column(i);
    let scale = m.norm();
    let residual = if scale > 0.0 { (m * q - q * lambda).norm() / scale } else { 0.0 };
    if !(residual <= RESIDUAL_TOL) {
        return Err(TesterError::Eigen(format!("minimal eigenpair residual {residual:e} exceeds {RESIDUAL_TOL:e}")));
    }
    Ok((lambda, residual))
}

/// The `l = 0` certificate without a matrix: `mean(y h(x)) - beta + eps`.
pub fn scalar_certificate(yh: &[f64], beta: f64, epsilon: f64) -> f64 {
    yh.iter().sum::<f64>() / yh.len() as f64 - beta + epsilon
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::enumerate_multi_indices;

    #[test]
    fn boundary_deviation_fails() {
        assert!(!mass_check(50, 100, 0.25, 0.25).pass);
        assert!(mass_check(49, 100, 0.25, 0.25).pass);
        assert!(mass_check(0, 100, 0.01, 0.02).pass);
    }

    #[test]
    fn positive_weights_give_psd() {
        let idx = enumerate_multi_indices(2, 2, 100).unwrap();
        let u: Vec<f64> = (0..200).map(|i| ((i * 37 % 101) as f64 / 50.0) - 1.0).collect();
        let yh = vec![1.0; 100];
        let out = certificate_check(&u, 2, &yh, &idx, 2, 0.6, 0.05, 0.0, 10).unwrap();
        assert!(out.min_eigenvalue.unwrap() >= -1e-14);
        assert!(out.pass);
    }

    #[test]
    fn scalar_and_matrix_paths_agree() {
        let idx = enumerate_multi_indices(3, 0, 10).unwrap();
        let u = vec![0.3; 3 * 7];
        let yh = [1.0, -1.0, 1.0, 1.0, 1.0, -1.0, 1.0];
        let m = certificate_matrix(&u, 3, &yh, &idx, 0, 0.6, 0.05);
        assert!((m[(0, 0)] - scalar_certificate(&yh, 0.6, 0.05)).abs() < 1e-15);
    }

    #[test]
    fn thin_slices_skip() {
        let idx = enumerate_multi_indices(2, 2, 100).unwrap();
        let out = moment_check(&[0.0; 10], 2, &idx, 2, 0.05, 50);
        assert!(out.skipped && out.pass && out.max_moment_dev.is_none());
    }
}
