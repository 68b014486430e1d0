//! Pairwise similarity of categorical profiles.
//!
//! The clustering loop only needs the integer count of matches ([`cm`]).
//! Overlap, Goodall and Lin are computed on demand for reporting; Goodall and
//! Lin take category frequencies from a [`FrequencyTable`] over whatever
//! population the caller considers current.

mod matrix;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use matrix::{InfluenceMatrix, SimilarityMatrix};
pub(crate) use matrix::{pair_count, tri_index};

use crate::dataset::{CategoryId, Dataset, FrequencyTable};

#[derive(Debug, Error, PartialEq)]
pub enum SimilarityError {
    #[error("similarity over an empty feature set")]
    NoFeatures,
    #[error("frequency-based similarity needs at least 2 objects, got {0}")]
    TooFewObjects(usize),
    #[error("Lin similarity is undefined: every compared category covers the whole population")]
    DegenerateLin,
    #[error("feature {0} is not among the remaining features")]
    FeatureNotRemaining(usize),
    #[error("expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("score {score} exceeds theta {theta}")]
    ScoreAboveTheta { score: u32, theta: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Cm,
    Overlap,
    Goodall,
    Lin,
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cm" => Ok(Self::Cm),
            "overlap" => Ok(Self::Overlap),
            "goodall" => Ok(Self::Goodall),
            "lin" => Ok(Self::Lin),
            other => Err(format!("unknown similarity measure '{other}'")),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cm => "cm",
            Self::Overlap => "overlap",
            Self::Goodall => "goodall",
            Self::Lin => "lin",
        })
    }
}

#[inline]
pub(crate) fn count_matches(x: &[CategoryId], y: &[CategoryId], features: &[usize]) -> u32 {
    features.iter().filter(|&&f| x[f] == y[f]).count() as u32
}

/// Count of matches: number of `features` on which `x` and `y` coincide.
pub fn cm(x: &[CategoryId], y: &[CategoryId], features: &[usize]) -> Result<u32, SimilarityError> {
    if features.is_empty() {
        return Err(SimilarityError::NoFeatures);
    }
    Ok(count_matches(x, y, features))
}

/// Overlap: `cm / |features|`.
pub fn overlap(x: &[CategoryId], y: &[CategoryId], features: &[usize]) -> Result<f64, SimilarityError> {
    let matches = cm(x, y, features)?;
    Ok(f64::from(matches) / features.len() as f64)
}

/// Goodall similarity. A match on a category of frequency `f` scores
/// `1 - f(f-1) / (n(n-1))`; the mean over features is returned.
pub fn goodall(
    x: &[CategoryId],
    y: &[CategoryId],
    freq: &FrequencyTable,
    features: &[usize],
) -> Result<f64, SimilarityError> {
    if features.is_empty() {
        return Err(SimilarityError::NoFeatures);
    }
    let n = freq.population();
    if n < 2 {
        return Err(SimilarityError::TooFewObjects(n));
    }
    let pairs = (n * (n - 1)) as f64;
    let total: f64 = features
        .iter()
        .filter(|&&i| x[i] == y[i])
        .map(|&i| {
            let f = freq.count(i, x[i]);
            1.0 - (f * f.saturating_sub(1)) as f64 / pairs
        })
        .sum();
    Ok(total / features.len() as f64)
}

/// Lin similarity, natural logarithm.
pub fn lin(
    x: &[CategoryId],
    y: &[CategoryId],
    freq: &FrequencyTable,
    features: &[usize],
) -> Result<f64, SimilarityError> {
    if features.is_empty() {
        return Err(SimilarityError::NoFeatures);
    }
    let n = freq.population();
    if n < 2 {
        return Err(SimilarityError::TooFewObjects(n));
    }
    let n = n as f64;
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for &i in features {
        let px = freq.count(i, x[i]) as f64 / n;
        let py = freq.count(i, y[i]) as f64 / n;
        numerator += if x[i] == y[i] {
            2.0 * px.ln()
        } else {
            2.0 * (px + py).ln()
        };
        denominator += px.ln() + py.ln();
    }
    if denominator == 0.0 {
        return Err(SimilarityError::DegenerateLin);
    }
    Ok(numerator / denominator)
}

/// Full symmetric `n x n` matrix of `measure` over all objects and features
/// of `ds`, diagonal included.
#[allow(clippy::needless_range_loop)]
pub fn pairwise(ds: &Dataset, measure: Measure) -> Result<Vec<Vec<f64>>, SimilarityError> {
    let features: Vec<usize> = (0..ds.m()).collect();
    let freq = ds.frequency_table();
    let n = ds.n();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let (x, y) = (ds.row(i), ds.row(j));
            let v = match measure {
                Measure::Cm => f64::from(cm(x, y, &features)?),
                Measure::Overlap => overlap(x, y, &features)?,
                Measure::Goodall => goodall(x, y, &freq, &features)?,
                Measure::Lin => lin(x, y, &freq, &features)?,
            };
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    Ok(out)
}
