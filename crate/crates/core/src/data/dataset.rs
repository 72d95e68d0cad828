use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::limits::Limits;

use super::adversary;
use super::halfspace::Halfspace;
use super::massart::{massart_labels, MassartModel};
use super::rng::{domain, stream_rng};
use super::DataError;

/// A finite slice `(lo, hi]` along a direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, z: f64) -> bool {
        self.lo < z && z <= self.hi
    }

    pub(crate) fn validate(&self) -> Result<(), DataError> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(DataError::InvalidParams(format!("slice needs finite lo < hi, got ({}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }
}

/// Everything needed to regenerate a dataset from its seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    /// Gaussian marginal with Massart labels.
    Massart { d: usize, n: usize, model: MassartModel },
    /// Moves `shift` probability mass out of `slice` (along the target
    /// direction) onto the two points `lo - 2` and `hi + 2`.
    SliceMassShift { d: usize, n: usize, model: MassartModel, slice: Interval, shift: f64 },
    /// Inside `slice`, rescales the first orthogonal coordinate so its
    /// normalized `He_2` moment becomes `deviation`.
    OrthogonalSkew { d: usize, n: usize, model: MassartModel, slice: Interval, deviation: f64 },
    /// Gaussian marginal; on `slice` the flip rate is `eta_bound + excess`.
    NoiseExcess { d: usize, n: usize, model: MassartModel, slice: Interval, excess: f64 },
}

impl Generator {
    pub fn model(&self) -> &MassartModel {
        match self {
            Generator::Massart { model, .. }
            | Generator::SliceMassShift { model, .. }
            | Generator::OrthogonalSkew { model, .. }
            | Generator::NoiseExcess { model, .. } => model,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match self {
            Generator::Massart { d, n, .. }
            | Generator::SliceMassShift { d, n, .. }
            | Generator::OrthogonalSkew { d, n, .. }
            | Generator::NoiseExcess { d, n, .. } => (*d, *n),
        }
    }

    /// The same generator with a different sample count.
    pub fn with_n(&self, n_new: usize) -> Generator {
        let mut g = self.clone();
        match &mut g {
            Generator::Massart { n, .. }
            | Generator::SliceMassShift { n, .. }
            | Generator::OrthogonalSkew { n, .. }
            | Generator::NoiseExcess { n, .. } => *n = n_new,
        }
        g
    }

    pub fn generate(&self, seed: u64, limits: &Limits) -> Result<Dataset, DataError> {
        let (d, n) = self.dims();
        if d < 2 || n < 1 {
            return Err(DataError::InvalidParams(format!("need d >= 2 and n >= 1, got d = {d}, n = {n}")));
        }
        if n > limits.sample_cap {
            return Err(DataError::InvalidParams(format!("n = {n} exceeds the sample cap {}", limits.sample_cap)));
        }
        let model = self.model();
        if model.target.dim() != d {
            return Err(DataError::Shape(format!("target dimension {} does not match d = {d}", model.target.dim())));
        }
        model.validate()?;
        let mut x = sample_gaussian(d, n, seed);
        let y = match self {
            Generator::Massart { .. } => massart_labels(&x, d, model, seed)?,
            Generator::SliceMassShift { slice, shift, .. } => {
                adversary::slice_mass_shift(&mut x, d, &model.target.v, slice, *shift, seed)?;
                massart_labels(&x, d, model, seed)?
            }
            Generator::OrthogonalSkew { slice, deviation, .. } => {
                adversary::orthogonal_skew(&mut x, d, &model.target.v, slice, *deviation)?;
                massart_labels(&x, d, model, seed)?
            }
            Generator::NoiseExcess { slice, excess, .. } => adversary::noise_excess_labels(&x, d, model, slice, *excess, seed)?,
        };
        Ok(Dataset { d, n, x, y, seed, provenance: Provenance::Generated { generator: self.clone() } })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Provenance {
    Generated {
        generator: Generator,
    },
    /// `base` with every row mapped by `rotation` (row-major `d x d`).
    Rotated {
        base: Box<Provenance>,
        rotation: Vec<f64>,
    },
}

impl Provenance {
    pub fn planted_target(&self) -> Option<Halfspace> {
        match self {
            Provenance::Generated { generator } => Some(generator.model().target.clone()),
            Provenance::Rotated { base, rotation } => {
                let h = base.planted_target()?;
                Some(Halfspace { v: apply_rows(rotation, h.v.len(), &h.v), t: h.t })
            }
        }
    }

    pub fn regenerate(&self, seed: u64, limits: &Limits) -> Result<Dataset, DataError> {
        match self {
            Provenance::Generated { generator } => generator.generate(seed, limits),
            Provenance::Rotated { base, rotation } => base.regenerate(seed, limits)?.rotated(rotation),
        }
    }
}

/// Rows of `x` are samples; `y` holds the ±1 labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub d: usize,
    pub n: usize,
    /// Row-major `n x d`.
    pub x: Vec<f64>,
    pub y: Vec<i8>,
    pub seed: u64,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.x.chunks_exact(self.d)
    }

    pub fn planted_target(&self) -> Option<Halfspace> {
        self.provenance.planted_target()
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.x.len() != self.n * self.d || self.y.len() != self.n {
            return Err(DataError::Shape(format!("x has {} entries and y {} for n = {}, d = {}", self.x.len(), self.y.len(), self.n, self.d)));
        }
        if self.y.iter().any(|y| *y != 1 && *y != -1) {
            return Err(DataError::Format("labels must be +1 or -1".into()));
        }
        Ok(())
    }

    /// Maps every row by the orthogonal matrix `q` (row-major `d x d`).
    pub fn rotated(&self, q: &[f64]) -> Result<Dataset, DataError> {
        check_orthogonal(q, self.d)?;
        let x: Vec<f64> = self.x.par_chunks(self.d).flat_map_iter(|row| apply_rows(q, self.d, row)).collect();
        Ok(Dataset {
            x,
            provenance: Provenance::Rotated { base: Box::new(self.provenance.clone()), rotation: q.to_vec() },
            ..self.clone()
        })
    }

    /// Fraction of rows with `h(x) != y`.
    pub fn error_of(&self, h: &Halfspace) -> f64 {
        let wrong: usize = self.x.par_chunks(self.d).zip(self.y.par_iter()).filter(|(row, y)| h.classify(row) != **y).count();
        wrong as f64 / self.n as f64
    }
}

/// `n x d` row-major standard normals; row `i` is drawn from stream `i`.
pub fn sample_gaussian(d: usize, n: usize, seed: u64) -> Vec<f64> {
    let mut x = vec![0.0; n * d];
    x.par_chunks_mut(d).enumerate().for_each(|(i, row)| {
        let mut rng = stream_rng(seed, domain::FEATURES, i as u64);
        for v in row.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
    });
    x
}

/// An orthogonal matrix from the QR factorization of a Gaussian matrix,
/// with the signs fixed so the factorization is unique.
pub fn random_orthogonal(d: usize, seed: u64) -> Vec<f64> {
    let g = DMatrix::from_row_slice(d, d, &sample_gaussian(d, d, seed));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push(q[(i, j)]);
        }
    }
    out
}

fn apply_rows(q: &[f64], d: usize, v: &[f64]) -> Vec<f64> {
    (0..d).map(|i| q[i * d..(i + 1) * d].iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn check_orthogonal(q: &[f64], d: usize) -> Result<(), DataError> {
    if q.len() != d * d {
        return Err(DataError::Shape(format!("rotation needs {} entries, got {}", d * d, q.len())));
    }
    let m = DMatrix::from_row_slice(d, d, q);
    let err = (m.transpose() * &m - DMatrix::<f64>::identity(d, d)).norm();
    if err > 1e-10 {
        return Err(DataError::InvalidParams(format!("rotation is not orthogonal: |Q^T Q - I| = {err:e}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(n: usize) -> Generator {
        let h = Halfspace::new(vec![1.0, 1.0, 0.0], 0.2).unwrap();
        Generator::Massart { d: 3, n, model: MassartModel::constant(h, 0.1) }
    }

    #[test]
    fn regenerates_bit_exactly() {
        let a = gen(500).generate(3, &Limits::default()).unwrap();
        let b = a.provenance.regenerate(3, &Limits::default()).unwrap();
        assert_eq!(a, b);
        let c = gen(500).generate(4, &Limits::default()).unwrap();
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn prefix_rows_do_not_depend_on_n() {
        let a = gen(100).generate(3, &Limits::default()).unwrap();
        let b = gen(300).generate(3, &Limits::default()).unwrap();
        assert_eq!(a.x[..], b.x[..300]);
        assert_eq!(a.y[..], b.y[..100]);
    }

    #[test]
    fn rotation_moves_the_target_with_the_data() {
        let a = gen(200).generate(5, &Limits::default()).unwrap();
        let q = random_orthogonal(3, 11);
        let r = a.rotated(&q).unwrap();
        let (h, hr) = (a.planted_target().unwrap(), r.planted_target().unwrap());
        assert!((hr.v.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..a.n {
            assert_eq!(h.classify(a.row(i)), hr.classify(r.row(i)));
        }
        assert_eq!(r.provenance.regenerate(5, &Limits::default()).unwrap(), r);
    }

    #[test]
    fn rejects_bad_shapes() {
        let h = Halfspace::new(vec![1.0, 0.0], 0.0).unwrap();
        let g = Generator::Massart { d: 3, n: 10, model: MassartModel::constant(h.clone(), 0.1) };
        assert!(g.generate(1, &Limits::default()).is_err());
        let g = Generator::Massart { d: 2, n: 0, model: MassartModel::constant(h, 0.1) };
        assert!(g.generate(1, &Limits::default()).is_err());
    }
}
