//! Sparse real vectors.
//!
//! Feature spaces run to tens of thousands of dimensions while a single pair
//! touches only the patterns its own phrases generate, so vectors are stored
//! as sorted `(index, value)` entries with explicit zeros dropped.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVec {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVec {
    pub fn zeros(dim: usize) -> Self {
        SparseVec {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let mut v = SparseVec::zeros(values.len());
        for (i, &x) in values.iter().enumerate() {
            if x != 0.0 {
                v.indices.push(i as u32);
                v.values.push(x);
            }
        }
        v
    }

    /// Builds from entries that may be unsorted; zero values are dropped and
    /// duplicate indices rejected.
    pub fn from_entries(dim: usize, mut entries: Vec<(u32, f64)>) -> Result<Self> {
        entries.sort_by_key(|&(i, _)| i);
        let mut v = SparseVec::zeros(dim);
        for (i, x) in entries {
            if i as usize >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: i as usize + 1,
                });
            }
            if v.indices.last() == Some(&i) {
                return Err(Error::InvalidArgument(format!("duplicate index {i}")));
            }
            if x != 0.0 {
                v.indices.push(i);
                v.values.push(x);
            }
        }
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &x)| (i as usize, x))
    }

    pub fn get(&self, i: usize) -> f64 {
        match self.indices.binary_search(&(i as u32)) {
            Ok(k) => self.values[k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, x) in self.iter() {
            out[i] = x;
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for x in &mut self.values {
            *x *= factor;
        }
    }

    /// `sum_i (self_i - other_i)^2`, merged over the union of stored indices.
    pub fn squared_distance(&self, other: &SparseVec) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let (mut a, mut b) = (0, 0);
        let mut acc = 0.0;
        while a < self.indices.len() && b < other.indices.len() {
            let (ia, ib) = (self.indices[a], other.indices[b]);
            let d = if ia == ib {
                let d = self.values[a] - other.values[b];
                a += 1;
                b += 1;
                d
            } else if ia < ib {
                a += 1;
                self.values[a - 1]
            } else {
                b += 1;
                other.values[b - 1]
            };
            acc += d * d;
        }
        acc += self.values[a..].iter().map(|x| x * x).sum::<f64>();
        acc += other.values[b..].iter().map(|x| x * x).sum::<f64>();
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip_drops_zeros() {
        let v = SparseVec::from_dense(&[0.0, 1.5, 0.0, -2.0]);
        assert_eq!(v.nnz(), 2);
        assert_eq!(v.get(1), 1.5);
        assert_eq!(v.get(2), 0.0);
        assert_eq!(v.to_dense(), vec![0.0, 1.5, 0.0, -2.0]);
    }

    #[test]
    fn squared_distance_matches_dense() {
        let a = [0.0, 1.0, 2.0, 0.0, 3.0];
        let b = [1.0, 0.0, 2.5, 0.0, 0.0];
        let dense: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
        let d = SparseVec::from_dense(&a)
            .squared_distance(&SparseVec::from_dense(&b))
            .unwrap();
        assert!((d - dense).abs() < 1e-15);
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let a = SparseVec::zeros(3);
        let b = SparseVec::zeros(4);
        assert!(matches!(
            a.squared_distance(&b),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(SparseVec::from_entries(2, vec![(2, 1.0)]).is_err());
        assert!(SparseVec::from_entries(4, vec![(1, 1.0), (1, 2.0)]).is_err());
    }
}
