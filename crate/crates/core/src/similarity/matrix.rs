//! Upper-triangular pairwise storage for CM similarity and influence matrices.

use rayon::prelude::*;

use super::{count_matches, SimilarityError};
use crate::dataset::CategoryId;

/// Flat offset of pair `(i, j)`, `i < j`, in an upper triangle over `size` entities.
#[inline]
pub(crate) fn tri_index(size: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < size);
    i * (2 * size - i - 1) / 2 + (j - i - 1)
}

#[inline]
fn ordered(i: usize, j: usize) -> (usize, usize) {
    assert_ne!(i, j, "diagonal entries are not stored");
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

pub(crate) fn pair_count(size: usize) -> usize {
    size * size.saturating_sub(1) / 2
}

/// Pairwise count-of-matches scores over the current entities, restricted to
/// the remaining features. Only `i < j` is stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityMatrix {
    size: usize,
    features: Vec<usize>,
    values: Vec<u32>,
}

impl SimilarityMatrix {
    /// Builds all pairwise CM values of `profiles` over `features`.
    ///
    /// Fewer than two profiles give an empty matrix.
    pub fn build<P>(profiles: &[P], features: &[usize]) -> Self
    where
        P: AsRef<[CategoryId]> + Sync,
    {
        let size = profiles.len();
        let values = (0..size)
            .into_par_iter()
            .flat_map_iter(|i| {
                let x = profiles[i].as_ref();
                (i + 1..size).map(move |j| count_matches(x, profiles[j].as_ref(), features))
            })
            .collect();
        Self {
            size,
            features: features.to_vec(),
            values,
        }
    }

    /// Builds a matrix from explicit upper-triangular values in row order.
    pub fn from_upper(size: usize, features: Vec<usize>, values: Vec<u32>) -> Result<Self, SimilarityError> {
        if values.len() != pair_count(size) {
            return Err(SimilarityError::ShapeMismatch {
                expected: pair_count(size),
                found: values.len(),
            });
        }
        let theta = features.len() as u32;
        if let Some(&bad) = values.iter().find(|&&v| v > theta) {
            return Err(SimilarityError::ScoreAboveTheta { score: bad, theta });
        }
        Ok(Self { size, features, values })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `θ`: number of features the scores are counted over.
    pub fn theta(&self) -> u32 {
        self.features.len() as u32
    }

    pub fn features(&self) -> &[usize] {
        &self.features
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        let (i, j) = ordered(i, j);
        self.values[tri_index(self.size, i, j)]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, value: u32) {
        let (i, j) = ordered(i, j);
        self.values[tri_index(self.size, i, j)] = value;
    }

    pub fn upper_values(&self) -> &[u32] {
        &self.values
    }

    /// `(i, j, m_ij)` for every stored pair, row by row.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        (0..self.size)
            .flat_map(move |i| (i + 1..self.size).map(move |j| (i, j)))
            .zip(self.values.iter().copied())
            .map(|((i, j), v)| (i, j, v))
    }

    /// Dense rows with `None` on and below the diagonal, as the matrix is printed.
    pub fn to_rows(&self) -> Vec<Vec<Option<u32>>> {
        (0..self.size)
            .map(|i| {
                (0..self.size)
                    .map(|j| (j > i).then(|| self.get(i, j)))
                    .collect()
            })
            .collect()
    }

    /// Removes `dropped` from the remaining features by decrementing every
    /// pair by its matches on the dropped features.
    ///
    /// The result equals [`SimilarityMatrix::build`] over the remaining
    /// features. `profiles` must be the ones the matrix was built from.
    pub fn after_drop<P>(&self, profiles: &[P], dropped: &[usize]) -> Result<Self, SimilarityError>
    where
        P: AsRef<[CategoryId]> + Sync,
    {
        if profiles.len() != self.size {
            return Err(SimilarityError::ShapeMismatch {
                expected: self.size,
                found: profiles.len(),
            });
        }
        for (pos, f) in dropped.iter().enumerate() {
            if !self.features.contains(f) {
                return Err(SimilarityError::FeatureNotRemaining(*f));
            }
            if dropped[..pos].contains(f) {
                return Err(SimilarityError::FeatureNotRemaining(*f));
            }
        }
        if dropped.is_empty() {
            return Ok(self.clone());
        }

        let size = self.size;
        let values = (0..size)
            .into_par_iter()
            .flat_map_iter(|i| {
                let x = profiles[i].as_ref();
                (i + 1..size).map(move |j| {
                    self.values[tri_index(size, i, j)] - count_matches(x, profiles[j].as_ref(), dropped)
                })
            })
            .collect();
        let features = self
            .features
            .iter()
            .copied()
            .filter(|f| !dropped.contains(f))
            .collect();
        Ok(Self { size, features, values })
    }

    /// Collapses entities: entity `a` of the result is entity `reps[a]` of `self`.
    pub(crate) fn select(&self, reps: &[usize]) -> Self {
        let size = reps.len();
        let mut values = Vec::with_capacity(pair_count(size));
        for a in 0..size {
            for b in a + 1..size {
                values.push(self.get(reps[a], reps[b]));
            }
        }
        Self {
            size,
            features: self.features.clone(),
            values,
        }
    }

    /// Thresholds the matrix: a bit is set iff `m_ij > alpha`.
    pub fn influence(&self, alpha: f64) -> InfluenceMatrix {
        InfluenceMatrix {
            size: self.size,
            alpha,
            bits: self.values.iter().map(|&v| f64::from(v) > alpha).collect(),
        }
    }
}

/// Boolean thresholding of a [`SimilarityMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceMatrix {
    size: usize,
    alpha: f64,
    bits: Vec<bool>,
}

impl InfluenceMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        let (i, j) = ordered(i, j);
        self.bits[tri_index(self.size, i, j)]
    }

    /// `η`: number of set bits.
    pub fn count_ones(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }
}
