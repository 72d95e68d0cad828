use serde::{Deserialize, Serialize};

use crate::limits::Limits;

use super::SandwichError;

/// Absolute constants of the construction. `c0` and `c1` are fixed by the
/// bump analysis; the others are found by calibration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandwichConstants {
    pub c0: f64,
    pub c1: f64,
    #[serde(rename = "Cw")]
    pub cw: f64,
    #[serde(rename = "Ck")]
    pub ck: f64,
    #[serde(rename = "Cm")]
    pub cm: f64,
    #[serde(rename = "CB")]
    pub cb: f64,
    #[serde(rename = "Ccorr")]
    pub ccorr: f64,
}

impl SandwichConstants {
    pub fn validate(&self) -> Result<(), SandwichError> {
        let all = [self.c0, self.c1, self.cw, self.ck, self.cm, self.cb, self.ccorr];
        if all.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(SandwichError::InvalidConstants("all constants must be finite and positive".into()));
        }
        if self.c1 < 2.0 {
            return Err(SandwichError::InvalidConstants(format!("c1 must be at least 2, got {}", self.c1)));
        }
        if self.cb < 2.0 * self.ccorr {
            return Err(SandwichError::InvalidConstants(format!(
                "CB = {} is below 2*Ccorr = {}, so B < 2*Ccorr*sqrt(mk)",
                self.cb,
                2.0 * self.ccorr
            )));
        }
        Ok(())
    }

    /// Every constant multiplied by `factor`, except the fixed `c0` and `c1`.
    pub fn scaled(&self, factor: f64) -> Self {
        SandwichConstants {
            cw: self.cw * factor,
            ck: self.ck * factor,
            cm: self.cm * factor,
            cb: self.cb * factor,
            ccorr: self.ccorr * factor,
            ..*self
        }
    }
}

/// Concrete schedule for one threshold. `t` is the non-negative threshold
/// the polynomials are built at; negative thresholds are handled by
/// reflection in [`super::build_sandwich`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichParams {
    pub t: f64,
    pub alpha: f64,
    pub m: usize,
    pub k: usize,
    pub window_width: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub delta_bump: f64,
    /// Correction constant used for the `B >= C (w + t)` check.
    pub ccorr: f64,
}

impl SandwichParams {
    /// Checks every structural invariant of the schedule.
    pub fn validate(&self) -> Result<(), SandwichError> {
        let bad = |msg: String| Err(SandwichError::InvalidParams(msg));
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(SandwichError::AlphaOutOfRange(self.alpha));
        }
        if self.t < 0.0 {
            return bad(format!("threshold must be non-negative after reflection, got {}", self.t));
        }
        if self.m < 3 || self.m.is_multiple_of(2) {
            return bad(format!("m must be odd and at least 3, got {}", self.m));
        }
        if self.k < 2 || self.k % 2 == 1 {
            return bad(format!("k must be even and at least 2, got {}", self.k));
        }
        if (self.k as f64) < 2.0 * (self.m as f64).log2() {
            return bad(format!("k = {} is below 2*log2(m) = {:.3}", self.k, 2.0 * (self.m as f64).log2()));
        }
        if self.b < self.ccorr * (self.window_width + self.t) {
            return bad(format!(
                "B = {:.6} is below Ccorr*(w+t) = {:.6}",
                self.b,
                self.ccorr * (self.window_width + self.t)
            ));
        }
        Ok(())
    }

    pub fn degree_bound(&self) -> usize {
        self.m * self.k
    }
}

/// The schedule `w, k, m, B, Δ` for threshold `t >= 0`.
pub fn select_params(t: f64, alpha: f64, consts: &SandwichConstants, limits: &Limits) -> Result<SandwichParams, SandwichError> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(SandwichError::AlphaOutOfRange(alpha));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(SandwichError::InvalidParams(format!("threshold must be finite and non-negative, got {t}")));
    }
    consts.validate()?;
    let log_inv = (1.0 / alpha).ln();
    let w = consts.cw * (log_inv.sqrt() + t);
    let k = 2 * ceil_to_usize(consts.ck * (t * t + log_inv))?;
    let m = 2 * ceil_to_usize(consts.cm * (t + 1.0).powi(2) * (t * t + log_inv) / (alpha * alpha))? + 1;
    let degree = m.saturating_mul(k);
    if degree > limits.degree_cap {
        return Err(SandwichError::DegreeCap { degree, cap: limits.degree_cap });
    }
    let b = consts.cb * (degree as f64).sqrt();
    let params = SandwichParams {
        t,
        alpha,
        m,
        k,
        window_width: w,
        b,
        delta_bump: consts.c1 * b / m as f64,
        ccorr: consts.ccorr,
    };
    params.validate()?;
    Ok(params)
}

fn ceil_to_usize(x: f64) -> Result<usize, SandwichError> {
    let c = x.ceil();
    if !(c.is_finite() && c < 1e15) {
        return Err(SandwichError::InvalidParams(format!("schedule value {x} is not representable")));
    }
    Ok((c as usize).max(1))
}
