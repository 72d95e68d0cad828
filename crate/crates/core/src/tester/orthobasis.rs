use nalgebra::DMatrix;

use crate::data::UNIT_TOL;

use super::TesterError;

/// Columns form an orthonormal basis of `w`'s complement: the last `d - 1`
/// columns of the Householder reflector that maps `w` onto `∓e_1`.
pub fn orthobasis(w: &[f64]) -> Result<DMatrix<f64>, TesterError> {
    let d = w.len();
    let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
    if d < 2 || (norm - 1.0).abs() > UNIT_TOL {
        return Err(TesterError::InvalidParams(format!("orthobasis needs a unit vector of dimension >= 2, got |w| = {norm}, d = {d}")));
    }
    let s = if w[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut v = w.to_vec();
    v[0] += s;
    let vv: f64 = v.iter().map(|a| a * a).sum();
    Ok(DMatrix::from_fn(d, d - 1, |i, j| {
        let col = j + 1;
        let delta = if i == col { 1.0 } else { 0.0 };
        delta - 2.0 * v[i] * v[col] / vv
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{sample_gaussian, Halfspace};

    #[test]
    fn complement_of_e1() {
        let u = orthobasis(&[1.0, 0.0]).unwrap();
        assert_eq!(u.shape(), (2, 1));
        assert!(u[(0, 0)].abs() < 1e-16 && (u[(1, 0)].abs() - 1.0).abs() < 1e-16);
        assert!(orthobasis(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn orthonormal_and_orthogonal() {
        for seed in 0..20 {
            let g = sample_gaussian(6, 1, seed);
            let w = Halfspace::new(g, 0.0).unwrap().v;
            let u = orthobasis(&w).unwrap();
            let gram = u.transpose() * &u - DMatrix::<f64>::identity(5, 5);
            assert!(gram.norm() <= 1e-12);
            let wt = DMatrix::from_row_slice(1, 6, &w) * &u;
            assert!(wt.norm() <= 1e-12);
        }
    }
}
