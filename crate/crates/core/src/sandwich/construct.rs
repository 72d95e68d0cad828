use serde::{Deserialize, Serialize};

use crate::limits::Limits;
use crate::poly::{chebyshev_over_x, Polynomial};
use crate::scalar::Scalar;

use super::params::{select_params, SandwichConstants, SandwichParams};
use super::SandwichError;

/// Lower and upper polynomials around `1(x >= t)`.
#[derive(Clone, Debug)]
pub struct SandwichPair {
    pub p_minus: Polynomial,
    pub p_plus: Polynomial,
    pub params: SandwichParams,
    pub consts: SandwichConstants,
    /// The threshold the pair sandwiches, which is `-params.t` when reflected.
    pub threshold: f64,
    pub reflected: bool,
    pub degree_bound: usize,
    pub precision: usize,
}

impl SandwichPair {
    pub fn summary(&self) -> PairSummary {
        PairSummary {
            t: self.threshold,
            alpha: self.params.alpha,
            m: self.params.m,
            k: self.params.k,
            b: self.params.b,
            w: self.params.window_width,
            delta_bump: self.params.delta_bump,
            degree: self.p_minus.degree().max(self.p_plus.degree()),
            reflected: self.reflected,
            precision_bits: self.precision,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub t: f64,
    pub alpha: f64,
    pub m: usize,
    pub k: usize,
    #[serde(rename = "B")]
    pub b: f64,
    pub w: f64,
    pub delta_bump: f64,
    pub degree: usize,
    pub reflected: bool,
    pub precision_bits: usize,
}

/// Precision that absorbs the monomial cancellation of a degree-`degree`
/// construction: the coefficients of `(T_m(x)/(m x))^k` reach about
/// `2^{1.27 mk}` while the polynomial stays bounded on [-1, 1], and the two
/// affine substitutions roughly double that.
pub fn working_precision(degree: usize, requested: usize) -> usize {
    let need = 192 + 3 * degree;
    let p = requested.max(need);
    p.div_ceil(64) * 64
}

/// The bump `f(x) = (T_m(x) / (m x))^k`.
pub fn bump_f(m: usize, k: usize, precision: usize, limits: &Limits) -> Result<Polynomial, SandwichError> {
    if m < 3 || m.is_multiple_of(2) {
        return Err(SandwichError::InvalidParams(format!("bump needs odd m >= 3, got {m}")));
    }
    if k < 2 || k % 2 == 1 {
        return Err(SandwichError::InvalidParams(format!("bump needs even k >= 2, got {k}")));
    }
    let base = chebyshev_over_x(m, precision)?.scale(&Scalar::from_ratio(1, m as i64, precision));
    Ok(base.power(k, limits.degree_cap)?)
}

/// `I = ∫_{-1}^{1} f(x) dx`, exactly from the antiderivative.
pub fn normalization(mass_poly: &Polynomial) -> Scalar {
    let a = mass_poly.antiderivative();
    let p = mass_poly.precision();
    &a.eval(&Scalar::one(p)) - &a.eval(&-Scalar::one(p))
}

/// `G`, the antiderivative of `g = f / I` through the origin.
fn bump_cdf(params: &SandwichParams, precision: usize, limits: &Limits) -> Result<Polynomial, SandwichError> {
    let f = bump_f(params.m, params.k, precision, limits)?;
    let i = normalization(&f);
    Ok(f.antiderivative().scale(&(Scalar::one(precision) / i)))
}

/// `G((x - c)/B) - G((x - c - w)/B)` for a window starting at `c`.
fn window(g_cdf: &Polynomial, c: f64, params: &SandwichParams, precision: usize) -> Polynomial {
    let p = precision;
    let inv_b = Scalar::one(p) / Scalar::from_f64(params.b, p);
    let c = Scalar::from_f64(c, p);
    let w = Scalar::from_f64(params.window_width, p);
    let upper = g_cdf.compose_affine(&inv_b, &-(&c * &inv_b));
    let lower = g_cdf.compose_affine(&inv_b, &-(&(&c + &w) * &inv_b));
    upper.sub(&lower)
}

/// The smoothed window `p(x) = ∫_{(x-t-w)/B}^{(x-t)/B} g(y) dy`, of degree
/// `(m-1) k`: the `x^{(m-1)k+1}` terms of the two ends cancel.
pub fn step_poly(params: &SandwichParams, limits: &Limits) -> Result<Polynomial, SandwichError> {
    params.validate()?;
    let prec = working_precision(params.degree_bound(), limits.precision());
    let g_cdf = bump_cdf(params, prec, limits)?;
    Ok(window(&g_cdf, params.t, params, prec))
}

/// Builds `(p_-, p_+)` for `1(x >= t)`. Negative thresholds are built at
/// `-t` and reflected through `q_-(x) = 1 - p_+(-x)`, `q_+(x) = 1 - p_-(-x)`.
pub fn build_sandwich(t: f64, alpha: f64, consts: &SandwichConstants, limits: &Limits) -> Result<SandwichPair, SandwichError> {
    let s = t.abs();
    let params = select_params(s, alpha, consts, limits)?;
    let mk = params.degree_bound();
    let prec = working_precision(mk, limits.precision());
    let g_cdf = bump_cdf(&params, prec, limits)?;

    // p(x - Δ): the window shifted right by the bump half-width.
    let shifted = window(&g_cdf, s + params.delta_bump, &params, prec);
    let c = Scalar::from_f64(consts.ccorr, prec);
    let growth = Polynomial::monomial((&c / &Scalar::from_f64(params.b, prec)).powi(mk), mk);
    // 2^{-k/4} = sqrt(2^{-k/2}) with k even.
    let floor = &c * &(Scalar::one(prec) / Scalar::from_i64(2, prec).powi(params.k / 2)).sqrt();
    let p_minus = shifted.sub(&growth).add_constant(&-floor);
    // p_+(x) = 1 - p_-(2t - x).
    let one = Scalar::one(prec);
    let p_plus = p_minus
        .compose_affine(&-one.clone(), &Scalar::from_f64(2.0 * s, prec))
        .scale(&-one.clone())
        .add_constant(&one);

    let (p_minus, p_plus, reflected) = if t < 0.0 {
        let q_minus = p_plus.reflect().scale(&-one.clone()).add_constant(&one);
        let q_plus = p_minus.reflect().scale(&-one.clone()).add_constant(&one);
        (q_minus, q_plus, true)
    } else {
        (p_minus, p_plus, false)
    };
    Ok(SandwichPair { p_minus, p_plus, params, consts: *consts, threshold: t, reflected, degree_bound: mk, precision: prec })
}
