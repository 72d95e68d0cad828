use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::halfspace::Halfspace;
use super::rng::{domain, stream_rng};
use super::DataError;

/// Flip-rate function `eta(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EtaProfile {
    Constant { rate: f64 },
    /// `eta_bound * exp(-|v.x - t|)`.
    Margin,
    /// Piecewise constant in the target margin `v.x - t`: `rates[i]` on
    /// `(breaks[i-1], breaks[i]]`, with the outer pieces unbounded.
    Regions { breaks: Vec<f64>, rates: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassartModel {
    pub target: Halfspace,
    pub eta_bound: f64,
    pub eta_profile: EtaProfile,
}

impl MassartModel {
    pub fn constant(target: Halfspace, rate: f64) -> Self {
        MassartModel { target, eta_bound: rate, eta_profile: EtaProfile::Constant { rate } }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        self.target.validate()?;
        let bad = |m: String| Err(DataError::InvalidParams(m));
        if !(0.0..0.5).contains(&self.eta_bound) {
            return bad(format!("eta_bound must lie in [0, 1/2), got {}", self.eta_bound));
        }
        let in_range = |r: f64| (0.0..=self.eta_bound).contains(&r);
        match &self.eta_profile {
            EtaProfile::Constant { rate } if !in_range(*rate) => bad(format!("constant rate {rate} outside [0, {}]", self.eta_bound)),
            EtaProfile::Regions { breaks, rates } => {
                if rates.len() != breaks.len() + 1 {
                    return bad(format!("{} breaks need {} rates, got {}", breaks.len(), breaks.len() + 1, rates.len()));
                }
                if breaks.windows(2).any(|w| !(w[0] < w[1])) || breaks.iter().any(|b| !b.is_finite()) {
                    return bad("region breaks must be finite and strictly increasing".into());
                }
                match rates.iter().find(|r| !in_range(**r)) {
                    Some(r) => bad(format!("region rate {r} outside [0, {}]", self.eta_bound)),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    pub fn rate(&self, x: &[f64]) -> f64 {
        match &self.eta_profile {
            EtaProfile::Constant { rate } => *rate,
            EtaProfile::Margin => self.eta_bound * (-self.target.margin(x).abs()).exp(),
            EtaProfile::Regions { breaks, rates } => {
                let m = self.target.margin(x);
                rates[breaks.partition_point(|b| *b < m)]
            }
        }
    }
}

/// Independent flips at `eta(x)` on top of the target labels. Row `i` uses
/// its own stream, so the labels do not depend on evaluation order.
pub fn massart_labels(x: &[f64], d: usize, model: &MassartModel, seed: u64) -> Result<Vec<i8>, DataError> {
    if model.target.dim() != d {
        return Err(DataError::Shape(format!("model dimension {} does not match data dimension {d}", model.target.dim())));
    }
    model.validate()?;
    Ok(labels_with(x, d, seed, |row| model.target.classify(row), |row| model.rate(row)))
}

/// Labels `base(x)` flipped with probability `rate(x)`, one stream per row.
pub(crate) fn labels_with<B, R>(x: &[f64], d: usize, seed: u64, base: B, rate: R) -> Vec<i8>
where
    B: Fn(&[f64]) -> i8 + Sync,
    R: Fn(&[f64]) -> f64 + Sync,
{
    x.par_chunks(d)
        .enumerate()
        .map(|(i, row)| {
            let u: f64 = stream_rng(seed, domain::LABELS, i as u64).random();
            let y = base(row);
            if u < rate(row) {
                -y
            } else {
                y
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn target() -> Halfspace {
        Halfspace::new(vec![1.0, 0.0], 0.3).unwrap()
    }

    #[test]
    fn region_rates() {
        let m = MassartModel {
            target: target(),
            eta_bound: 0.3,
            eta_profile: EtaProfile::Regions { breaks: vec![-1.0, 1.0], rates: vec![0.1, 0.2, 0.3] },
        };
        m.validate().unwrap();
        assert_eq!(m.rate(&[-5.0, 0.0]), 0.1);
        // Margin exactly -1 sits in the lower region.
        assert_eq!(m.rate(&[-0.7, 0.0]), 0.1);
        assert_eq!(m.rate(&[0.3, 0.0]), 0.2);
        assert_eq!(m.rate(&[9.0, 0.0]), 0.3);
    }

    #[test]
    fn rejects_rates_above_bound() {
        let mut m = MassartModel::constant(target(), 0.2);
        m.eta_profile = EtaProfile::Constant { rate: 0.25 };
        assert!(m.validate().is_err());
        assert!(MassartModel::constant(target(), 0.5).validate().is_err());
        let r = MassartModel { target: target(), eta_bound: 0.2, eta_profile: EtaProfile::Regions { breaks: vec![0.0], rates: vec![0.1] } };
        assert!(r.validate().is_err());
    }

    #[test]
    fn margin_profile_peaks_at_boundary() {
        let m = MassartModel { target: target(), eta_bound: 0.4, eta_profile: EtaProfile::Margin };
        assert_eq!(m.rate(&[0.3, 7.0]), 0.4);
        assert!(m.rate(&[2.3, 0.0]) < 0.4 * 0.14);
    }

    #[test]
    fn zero_noise_is_exact() {
        let x = vec![0.5, 1.0, -0.2, 3.0, 0.3, 0.0];
        let y = massart_labels(&x, 2, &MassartModel::constant(target(), 0.0), 1).unwrap();
        assert_eq!(y, vec![1, -1, 1]);
    }
}
