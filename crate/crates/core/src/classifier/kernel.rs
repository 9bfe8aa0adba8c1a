use rayon::prelude::*;

use crate::error::Result;
use crate::vector::SparseVec;

/// `exp(-gamma * |u - v|^2)`
pub fn rbf_kernel(u: &SparseVec, v: &SparseVec, gamma: f64) -> Result<f64> {
    Ok((-gamma * u.squared_distance(v)?).exp())
}

/// Kernel values over a fixed training set: a full matrix for small sets,
/// rows computed on demand otherwise.
pub(crate) enum Gram<'a> {
    Dense { n: usize, k: Vec<f64> },
    Lazy { xs: &'a [&'a SparseVec], gamma: f64 },
}

const DENSE_LIMIT: usize = 5000;

impl<'a> Gram<'a> {
    /// Vectors must share one dimension; the caller checks.
    pub(crate) fn new(xs: &'a [&'a SparseVec], gamma: f64) -> Self {
        let n = xs.len();
        if n > DENSE_LIMIT {
            return Gram::Lazy { xs, gamma };
        }
        let k: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|ij| {
                let (i, j) = (ij / n, ij % n);
                let (i, j) = (i.min(j), i.max(j));
                rbf_kernel(xs[i], xs[j], gamma).expect("dimensions checked")
            })
            .collect();
        Gram::Dense { n, k }
    }

    pub(crate) fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Gram::Dense { n, k } => k[i * n + j],
            Gram::Lazy { xs, gamma } => {
                let (i, j) = (i.min(j), i.max(j));
                rbf_kernel(xs[i], xs[j], *gamma).expect("dimensions checked")
            }
        }
    }

    pub(crate) fn row(&self, i: usize) -> Vec<f64> {
        match self {
            Gram::Dense { n, k } => k[i * n..(i + 1) * n].to_vec(),
            Gram::Lazy { xs, .. } => (0..xs.len()).into_par_iter().map(|j| self.get(i, j)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_similarity_is_one() {
        let v = SparseVec::from_dense(&[0.3, 0.0, -1.2]);
        assert_eq!(rbf_kernel(&v, &v, 0.7).unwrap(), 1.0);
        let z = SparseVec::zeros(3);
        assert_eq!(rbf_kernel(&z, &z, 0.01).unwrap(), 1.0);
    }

    #[test]
    fn orthonormal_pair() {
        let u = SparseVec::from_dense(&[1.0, 0.0]);
        let v = SparseVec::from_dense(&[0.0, 1.0]);
        assert!((rbf_kernel(&u, &v, 0.5).unwrap() - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(rbf_kernel(&SparseVec::zeros(2), &SparseVec::zeros(3), 1.0).is_err());
    }

    #[test]
    fn gram_is_symmetric_and_matches_lazy() {
        let a = SparseVec::from_dense(&[1.0, 0.0, 0.5]);
        let b = SparseVec::from_dense(&[0.0, 2.0, 0.5]);
        let c = SparseVec::zeros(3);
        let xs = [&a, &b, &c];
        let dense = Gram::new(&xs, 0.3);
        let lazy = Gram::Lazy { xs: &xs, gamma: 0.3 };
        for i in 0..3 {
            assert_eq!(dense.row(i), lazy.row(i));
            for j in 0..3 {
                assert_eq!(dense.get(i, j), dense.get(j, i));
            }
        }
    }
}
