//! Adaptive Gauss–Legendre quadrature in extended precision.
//!
//! This is the independent oracle for every Gaussian integral the crate
//! certifies analytically. Each panel is integrated with an `n`-point rule
//! and with the same rule on its two halves; the difference is the panel
//! error estimate, and the panel with the largest estimate is split until the
//! summed estimate meets the tolerance.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use thiserror::Error;

use crate::poly::Polynomial;
use crate::scalar::Scalar;
use crate::special::gaussian_density;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {estimate:e})")]
    NoConvergence { subdivisions: usize, estimate: f64 },
    #[error("integration bounds must be finite with lo < hi, got [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    /// Integrates `f(x) φ(x)` with `φ` the standard normal density.
    Gaussian,
    /// Integrates `f(x)`.
    Lebesgue,
}

#[derive(Clone, Debug)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    /// Absolute floor for integrals that vanish.
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub nodes: usize,
    pub initial_panels: usize,
    pub precision: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            rel_tol: 1e-25,
            abs_tol: 0.0,
            max_subdivisions: 4000,
            nodes: 20,
            initial_panels: 16,
            precision: 256,
        }
    }
}

type Rule = Rc<(Vec<Scalar>, Vec<Scalar>)>;

thread_local! {
    static RULES: RefCell<HashMap<(usize, usize), Rule>> = RefCell::new(HashMap::new());
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on
/// `P_n` from the usual cosine guesses.
fn legendre_rule(n: usize, precision: usize) -> Rule {
    if let Some(r) = RULES.with(|c| c.borrow().get(&(n, precision)).cloned()) {
        return r;
    }
    let p = precision;
    let one = Scalar::one(p);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = Scalar::from_f64(guess, p);
        let mut dp = one.clone();
        for _ in 0..64 {
            let (pn, pn1) = legendre_pair(n, &x);
            // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1).
            dp = &(&(&x * &pn) - &pn1) * &Scalar::from_u64(n as u64, p) / (&(&x * &x) - &one);
            let dx = &pn / &dp;
            x = &x - &dx;
            let small = match (dx.exponent(), x.exponent()) {
                (None, _) => true,
                (Some(e), Some(ex)) => ex - e > p as i64 - 4,
                (Some(e), None) => e < -(p as i64),
            };
            if small {
                let (pn, pn1) = legendre_pair(n, &x);
                dp = &(&(&x * &pn) - &pn1) * &Scalar::from_u64(n as u64, p) / (&(&x * &x) - &one);
                break;
            }
        }
        let w = Scalar::from_i64(2, p) / (&(&one - &(&x * &x)) * &(&dp * &dp));
        nodes.push(x);
        weights.push(w);
    }
    let rule = Rc::new((nodes, weights));
    RULES.with(|c| c.borrow_mut().insert((n, precision), rule.clone()));
    rule
}

/// `(P_n(x), P_{n-1}(x))` by Bonnet's recurrence.
fn legendre_pair(n: usize, x: &Scalar) -> (Scalar, Scalar) {
    let p = x.precision();
    let mut prev = Scalar::one(p);
    let mut cur = x.clone();
    for j in 1..n {
        let jj = j as u64;
        let next = (&(&(x * &cur) * &Scalar::from_u64(2 * jj + 1, p)) - &(&prev * &Scalar::from_u64(jj, p)))
            / Scalar::from_u64(jj + 1, p);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

struct Panel {
    lo: Scalar,
    hi: Scalar,
    value: Scalar,
    error: Scalar,
}

/// Integrates `f` (times `φ` for [`Weight::Gaussian`]) over `[lo, hi]`.
pub fn quadrature_oracle(
    f: &dyn Fn(&Scalar) -> Scalar,
    weight: Weight,
    lo: f64,
    hi: f64,
    opts: &QuadratureOptions,
) -> Result<Scalar, QuadratureError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(QuadratureError::BadInterval { lo, hi });
    }
    let p = opts.precision.max(128);
    let rule = legendre_rule(opts.nodes, p);
    let integrand = |x: &Scalar| -> Scalar {
        match weight {
            Weight::Lebesgue => f(x),
            Weight::Gaussian => &f(x) * &gaussian_density(x),
        }
    };
    let gauss = |a: &Scalar, b: &Scalar| -> Scalar {
        let half = Scalar::from_ratio(1, 2, p);
        let mid = &(a + b) * &half;
        let rad = &(b - a) * &half;
        let mut acc = Scalar::zero(p);
        for (x, w) in rule.0.iter().zip(&rule.1) {
            let xi = &mid + &(&rad * x);
            acc = &acc + &(w * &integrand(&xi));
        }
        &acc * &rad
    };
    let make_panel = |a: Scalar, b: Scalar| -> Panel {
        let whole = gauss(&a, &b);
        let mid = &(&a + &b) * &Scalar::from_ratio(1, 2, p);
        let halves = &gauss(&a, &mid) + &gauss(&mid, &b);
        let error = (&whole - &halves).abs();
        Panel { lo: a, hi: b, value: halves, error }
    };

    let (a, b) = (Scalar::from_f64(lo, p), Scalar::from_f64(hi, p));
    let width = &(&b - &a) / &Scalar::from_u64(opts.initial_panels as u64, p);
    let mut panels: Vec<Panel> = (0..opts.initial_panels)
        .map(|i| {
            let l = &a + &(&width * &Scalar::from_u64(i as u64, p));
            let r = if i + 1 == opts.initial_panels { b.clone() } else { &l + &width };
            make_panel(l, r)
        })
        .collect();

    let tol_rel = Scalar::from_f64(opts.rel_tol, p);
    let tol_abs = Scalar::from_f64(opts.abs_tol, p);
    for _ in 0..=opts.max_subdivisions {
        let total = panels.iter().fold(Scalar::zero(p), |acc, q| &acc + &q.value);
        let err = panels.iter().fold(Scalar::zero(p), |acc, q| &acc + &q.error);
        let target = Scalar::max(&(&total.abs() * &tol_rel), &tol_abs);
        if err <= target {
            return Ok(total);
        }
        // Split the worst panel; ties go to the leftmost.
        let mut worst = 0;
        for (i, q) in panels.iter().enumerate() {
            if q.error > panels[worst].error {
                worst = i;
            }
        }
        let q = panels.remove(worst);
        let mid = &(&q.lo + &q.hi) * &Scalar::from_ratio(1, 2, p);
        panels.insert(worst, make_panel(mid.clone(), q.hi));
        panels.insert(worst, make_panel(q.lo, mid));
    }
    let estimate = panels.iter().fold(Scalar::zero(p), |acc, q| &acc + &q.error).to_f64();
    Err(QuadratureError::NoConvergence { subdivisions: opts.max_subdivisions, estimate })
}

/// Symmetric truncation radius for Gaussian integrals of a degree-`deg`
/// polynomial: past it the weight has decayed beyond any working precision.
pub fn gaussian_truncation(deg: usize) -> f64 {
    40.0 + 2.0 * (deg as f64).sqrt()
}

/// `E[p(x)]` for `x ~ N(0, 1)` by quadrature: the independent check on
/// [`crate::poly::gaussian_expectation`].
pub fn gaussian_expectation_quadrature(p: &Polynomial, opts: &QuadratureOptions) -> Result<Scalar, QuadratureError> {
    let prec = opts.precision.max(p.precision());
    let opts = QuadratureOptions { precision: prec, ..opts.clone() };
    let l = gaussian_truncation(p.degree());
    quadrature_oracle(&|x| p.eval(x), Weight::Gaussian, -l, l, &opts)
}
