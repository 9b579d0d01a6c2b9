use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A sparse feature vector stored as `(index, value)` pairs with strictly
/// increasing indices and no explicit zeros.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector<T> {
    entries: Vec<(usize, T)>,
}

impl<T: Scalar> SparseVector<T> {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    /// Builds a vector from pairs that must already be sorted by strictly
    /// increasing index. Zero values are dropped.
    pub fn from_sorted(pairs: Vec<(usize, T)>) -> Result<Self> {
        if pairs.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidParameter(
                "sparse indices must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            entries: pairs.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        })
    }

    /// Builds a vector from a dense slice, skipping zeros.
    pub fn from_dense(values: &[T]) -> Self {
        Self {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (i, *v))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(usize, T)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.entries.iter().copied()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// One past the largest stored index, or 0 for the empty vector.
    pub fn dim(&self) -> usize {
        self.entries.last().map_or(0, |(i, _)| i + 1)
    }

    pub fn squared_norm(&self) -> T {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }

    pub fn norm(&self) -> T {
        self.squared_norm().sqrt()
    }

    /// Dot product against a dense vector. Indices past the end of `dense`
    /// contribute nothing.
    pub fn dot_dense(&self, dense: &[T]) -> T {
        self.entries
            .iter()
            .filter_map(|&(i, v)| dense.get(i).map(|w| *w * v))
            .sum()
    }

    /// Scales to unit L2 norm. The zero vector is returned unchanged.
    pub fn normalized(mut self) -> Self {
        let norm = self.norm();
        if norm > T::zero() {
            for (_, v) in &mut self.entries {
                *v = *v / norm;
            }
        }
        self
    }
}
