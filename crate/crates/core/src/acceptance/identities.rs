use rand::Rng;
use serde_json::json;

use crate::data::rng::stream_rng;
use crate::poly::{chebyshev, chebyshev_over_x, gaussian_expectation, gaussian_moment, hermite_normalized};
use crate::scalar::Scalar;

use super::Outcome;

const PREC: usize = 512;
const TOL: f64 = 1e-12;
const ORTHO_TOL: f64 = 1e-20;
/// Stream domain for identity probes; distinct from the data domains.
const IDENTITY_DOMAIN: u64 = 6;

fn double_factorial(n: u64) -> u128 {
    (1..=n).rev().step_by(2).map(|v| v as u128).product()
}

pub(super) fn criterion(seed: u64) -> Outcome {
    let mut rng = stream_rng(seed, IDENTITY_DOMAIN, 0);
    let cheb: Vec<_> = (0..=25).map(|m| chebyshev(m, PREC)).collect();

    // T_m(cos θ) = cos(mθ).
    let mut cos_worst = 0.0f64;
    for _ in 0..200 {
        let m = rng.random_range(0..=25usize);
        let th = rng.random_range(0.0..std::f64::consts::PI);
        let v = cheb[m].eval_f64_point(th.cos()).to_f64();
        cos_worst = cos_worst.max((v - (m as f64 * th).cos()).abs());
    }

    // |T_m(x)| <= (2|x|)^m for |x| >= 1.
    let mut growth_violations = 0;
    for _ in 0..200 {
        let m = rng.random_range(0..=15usize);
        let x = rng.random_range(1.0..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let v = cheb[m].eval_f64_point(x).abs();
        if v > Scalar::from_f64(2.0 * x.abs(), PREC).powi(m) {
            growth_violations += 1;
        }
    }

    // T_m'(0) = (-1)^{(m-1)/2} m for odd m, and T_m(x)/x agrees at 0.
    let mut sign_law_failures = Vec::new();
    for m in (1..=25usize).step_by(2) {
        let want = if (m - 1) / 2 % 2 == 0 { m as i64 } else { -(m as i64) };
        let want = Scalar::from_i64(want, PREC);
        let d = cheb[m].derivative().eval(&Scalar::zero(PREC));
        let q = chebyshev_over_x(m, PREC).expect("odd m").eval(&Scalar::zero(PREC));
        if !(&d - &want).is_zero() || !(&q - &want).is_zero() {
            sign_law_failures.push(m);
        }
    }

    // |sin(mθ)| <= m |sin θ|.
    let mut sine_worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let m = rng.random_range(1..=50usize);
        let th = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        sine_worst = sine_worst.max((m as f64 * th).sin().abs() - m as f64 * th.sin().abs());
    }

    // E[He_i He_j] = δ_ij.
    let herm: Vec<_> = (0..=8).map(|k| hermite_normalized(k, PREC)).collect();
    let mut ortho_worst = 0.0f64;
    for i in 0..=8 {
        for j in 0..=8 {
            let e = gaussian_expectation(&herm[i].mul(&herm[j]));
            let delta = Scalar::from_i64((i == j) as i64, PREC);
            ortho_worst = ortho_worst.max((&e - &delta).abs().to_f64());
        }
    }

    // E[x^n] = (n-1)!! for even n, 0 for odd n, exactly.
    let mut moment_failures = Vec::new();
    for n in 0..=20usize {
        let want = if n % 2 == 1 { 0 } else { double_factorial(n.saturating_sub(1) as u64) };
        let got = gaussian_moment(n, PREC);
        if !(&got - &Scalar::from_u64(want as u64, PREC)).is_zero() {
            moment_failures.push(n);
        }
    }

    let checks = [
        ("chebyshev_cosine", cos_worst <= TOL),
        ("chebyshev_growth", growth_violations == 0),
        ("chebyshev_derivative_sign", sign_law_failures.is_empty()),
        ("sine_bound", sine_worst <= TOL),
        ("hermite_orthonormal", ortho_worst <= ORTHO_TOL),
        ("gaussian_moments", moment_failures.is_empty()),
    ];
    let passed = checks.iter().filter(|c| c.1).count();
    let failing: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let summary = if failing.is_empty() {
        format!("{passed}/6 identity families hold")
    } else {
        format!("{passed}/6 identity families hold, failing: {}", failing.join(", "))
    };
    let report = json!({
        "chebyshev_cosine": { "samples": 200, "max_abs_error": cos_worst, "tolerance": TOL },
        "chebyshev_growth": { "samples": 200, "violations": growth_violations },
        "chebyshev_derivative_sign": { "orders": "odd 1..=25", "failures": sign_law_failures },
        "sine_bound": { "samples": 1000, "max_excess": sine_worst, "tolerance": TOL },
        "hermite_orthonormal": { "max_degree": 8, "max_abs_error": ortho_worst, "tolerance": ORTHO_TOL },
        "gaussian_moments": { "orders": "0..=20", "failures": moment_failures },
        "checks": checks.iter().map(|c| json!({ "name": c.0, "pass": c.1 })).collect::<Vec<_>>(),
    });
    (failing.is_empty(), summary, report)
}
