use serde::{Deserialize, Serialize};

use super::bases::hermite_normalized_f64;
use super::PolyError;

/// Exponent vector `alpha` for a tensor Hermite polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    pub entries: Vec<usize>,
    pub total: usize,
}

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        let total = entries.iter().sum();
        MultiIndex { entries, total }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `C(dim + l, l)` computed without overflow for the sizes that matter.
pub fn multi_index_count(dim: usize, l: usize) -> usize {
    let mut c: u128 = 1;
    for i in 1..=l as u128 {
        c = c * (dim as u128 + i) / i;
        if c > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    c as usize
}

/// All multi-indices of length `dim` with total at most `l`, in graded
/// lexicographic order: by total ascending, then with larger leading entries
/// first.
pub fn enumerate_multi_indices(dim: usize, l: usize, cap: usize) -> Result<Vec<MultiIndex>, PolyError> {
    let count = multi_index_count(dim, l);
    if count > cap {
        return Err(PolyError::MatrixDimCap { count, cap });
    }
    let mut out = Vec::with_capacity(count);
    let mut buf = vec![0; dim];
    for total in 0..=l {
        fill(&mut buf, 0, total, &mut out);
    }
    Ok(out)
}

fn fill(buf: &mut [usize], pos: usize, remaining: usize, out: &mut Vec<MultiIndex>) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining;
        out.push(MultiIndex::new(buf.to_vec()));
        return;
    }
    for first in (0..=remaining).rev() {
        buf[pos] = first;
        fill(buf, pos + 1, remaining - first, out);
    }
}

/// `prod_i He_{alpha_i}(z_i)` in double precision.
pub fn hermite_tensor_eval(alpha: &MultiIndex, z: &[f64]) -> Result<f64, PolyError> {
    if alpha.len() != z.len() {
        return Err(PolyError::LengthMismatch { expected: alpha.len(), got: z.len() });
    }
    let mut buf = Vec::new();
    let mut acc = 1.0;
    for (&a, &x) in alpha.entries.iter().zip(z) {
        if a > 0 {
            hermite_normalized_f64(a, x, &mut buf);
            acc *= buf[a];
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn entries(v: &[MultiIndex]) -> Vec<Vec<usize>> {
        v.iter().map(|a| a.entries.clone()).collect()
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(entries(&enumerate_multi_indices(2, 1, 2000).unwrap()), vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
        assert_eq!(enumerate_multi_indices(2, 2, 2000).unwrap().len(), 6);
        assert_eq!(entries(&enumerate_multi_indices(1, 3, 2000).unwrap()), vec![vec![0], vec![1], vec![2], vec![3]]);
        assert_eq!(
            enumerate_multi_indices(10, 5, 2000).unwrap_err(),
            PolyError::MatrixDimCap { count: 3003, cap: 2000 }
        );
    }

    #[test]
    fn tensor_eval_examples() {
        let e = |a: &[usize], z: &[f64]| hermite_tensor_eval(&MultiIndex::new(a.to_vec()), z).unwrap();
        assert_eq!(e(&[0, 0], &[3.0, -7.0]), 1.0);
        assert_eq!(e(&[1, 0], &[2.0, 5.0]), 2.0);
        assert!((e(&[2, 1], &[0.0, 1.0]) + 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(hermite_tensor_eval(&MultiIndex::new(vec![1]), &[1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn enumeration_count_and_order(dim in 1usize..6, l in 0usize..6) {
            let all = enumerate_multi_indices(dim, l, usize::MAX).unwrap();
            prop_assert_eq!(all.len(), multi_index_count(dim, l));
            for w in all.windows(2) {
                prop_assert!(w[0].total < w[1].total || (w[0].total == w[1].total && w[0].entries > w[1].entries));
            }
            for a in &all {
                prop_assert_eq!(a.total, a.entries.iter().sum::<usize>());
                prop_assert!(a.total <= l);
            }
        }
    }
}
