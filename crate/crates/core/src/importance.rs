//! Feature importance: partial grouping power (PGP), partial partitioning
//! power (PPP) and the influence-matrix based PGP2.
//!
//! Values are exact rationals so that ties, which drive both feature
//! selection and termination, are detected without rounding.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::dataset::{CategoryId, FrequencyTable};
use crate::similarity::{count_matches, SimilarityMatrix};

pub type Rational = Ratio<u64>;

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Error, PartialEq)]
pub enum ImportanceError {
    #[error("importance needs at least 2 objects, got {0}")]
    TooFewObjects(usize),
    #[error("importance over an empty feature set")]
    NoFeatures,
    #[error("no two objects match on any feature: no grouping information")]
    NoGroupingInformation,
    #[error("all objects are identical on every feature: no partitioning information")]
    NoPartitioningInformation,
    #[error("no pair exceeds the influence threshold")]
    NoInfluence,
    #[error("candidate feature {0} is not among the remaining features")]
    CandidateNotRemaining(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ImportanceMeasure {
    Pgp,
    Ppp,
}

impl FromStr for ImportanceMeasure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pgp" => Ok(Self::Pgp),
            "ppp" => Ok(Self::Ppp),
            other => Err(format!("unknown importance measure '{other}'")),
        }
    }
}

impl fmt::Display for ImportanceMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pgp => "pgp",
            Self::Ppp => "ppp",
        })
    }
}

/// PGP2 of one candidate feature set: `surviving / total` influence bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Pgp2Score {
    pub candidate: Vec<usize>,
    pub surviving: u64,
    pub total: u64,
    #[serde(serialize_with = "serialize_rational")]
    pub value: Rational,
}

/// Importance of every remaining feature over one population.
///
/// Pair counts are ordered (`f(f-1)`), so they are twice the number of
/// unordered pairs; the factor cancels in every ratio.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImportanceReport {
    pub population: usize,
    pub features: Vec<usize>,
    pub match_pairs: Vec<u64>,
    pub mismatch_pairs: Vec<u64>,
    #[serde(serialize_with = "serialize_rationals")]
    pub pgp: Option<Vec<Rational>>,
    #[serde(serialize_with = "serialize_rationals")]
    pub ppp: Option<Vec<Rational>>,
    pub pgp2: Vec<Pgp2Score>,
}

impl ImportanceReport {
    /// Match and mismatch pair counts per feature; no ratios yet.
    pub fn pair_counts(freq: &FrequencyTable, features: &[usize]) -> Result<Self, ImportanceError> {
        let n = freq.population();
        if n < 2 {
            return Err(ImportanceError::TooFewObjects(n));
        }
        if features.is_empty() {
            return Err(ImportanceError::NoFeatures);
        }
        let all_pairs = (n * (n - 1)) as u64;
        let match_pairs: Vec<u64> = features
            .iter()
            .map(|&f| {
                freq.feature_counts(f)
                    .iter()
                    .map(|&c| (c * c.saturating_sub(1)) as u64)
                    .sum()
            })
            .collect();
        let mismatch_pairs = match_pairs.iter().map(|&mp| all_pairs - mp).collect();
        Ok(Self {
            population: n,
            features: features.to_vec(),
            match_pairs,
            mismatch_pairs,
            pgp: None,
            ppp: None,
            pgp2: Vec::new(),
        })
    }

    pub fn with_pgp(mut self) -> Result<Self, ImportanceError> {
        self.pgp = Some(shares(&self.match_pairs).ok_or(ImportanceError::NoGroupingInformation)?);
        Ok(self)
    }

    pub fn with_ppp(mut self) -> Result<Self, ImportanceError> {
        self.ppp = Some(shares(&self.mismatch_pairs).ok_or(ImportanceError::NoPartitioningInformation)?);
        Ok(self)
    }

    pub fn values(&self, measure: ImportanceMeasure) -> Option<&[Rational]> {
        match measure {
            ImportanceMeasure::Pgp => self.pgp.as_deref(),
            ImportanceMeasure::Ppp => self.ppp.as_deref(),
        }
    }

    /// Unreduced numerators of `measure`, one per feature.
    pub fn numerators(&self, measure: ImportanceMeasure) -> &[u64] {
        match measure {
            ImportanceMeasure::Pgp => &self.match_pairs,
            ImportanceMeasure::Ppp => &self.mismatch_pairs,
        }
    }

    /// Common unreduced denominator of `measure`.
    pub fn denominator(&self, measure: ImportanceMeasure) -> u64 {
        self.numerators(measure).iter().sum()
    }
}

fn shares(numerators: &[u64]) -> Option<Vec<Rational>> {
    let total: u64 = numerators.iter().sum();
    (total > 0).then(|| numerators.iter().map(|&x| Rational::new(x, total)).collect())
}

/// PGP of each feature: its share of all matching object pairs.
pub fn pgp(freq: &FrequencyTable, features: &[usize]) -> Result<ImportanceReport, ImportanceError> {
    ImportanceReport::pair_counts(freq, features)?.with_pgp()
}

/// PPP of each feature: its share of all mismatching object pairs.
pub fn ppp(freq: &FrequencyTable, features: &[usize]) -> Result<ImportanceReport, ImportanceError> {
    ImportanceReport::pair_counts(freq, features)?.with_ppp()
}

/// Both measures on one report.
pub fn importance(
    freq: &FrequencyTable,
    features: &[usize],
    measure: ImportanceMeasure,
) -> Result<ImportanceReport, ImportanceError> {
    match measure {
        ImportanceMeasure::Pgp => pgp(freq, features),
        ImportanceMeasure::Ppp => ppp(freq, features),
    }
}

/// PGP2 of `candidate`: the fraction of influence bits (pairs scoring above
/// `alpha`) that survive once the candidate features are dropped from `sm`.
pub fn pgp2<P>(
    sm: &SimilarityMatrix,
    profiles: &[P],
    candidate: &[usize],
    alpha: f64,
) -> Result<Pgp2Score, ImportanceError>
where
    P: AsRef<[CategoryId]>,
{
    if let Some(&f) = candidate.iter().find(|f| !sm.features().contains(f)) {
        return Err(ImportanceError::CandidateNotRemaining(f));
    }
    let mut total = 0;
    let mut surviving = 0;
    for (i, j, score) in sm.pairs() {
        if f64::from(score) > alpha {
            total += 1;
            let reduced = score - count_matches(profiles[i].as_ref(), profiles[j].as_ref(), candidate);
            if f64::from(reduced) > alpha {
                surviving += 1;
            }
        }
    }
    if total == 0 {
        return Err(ImportanceError::NoInfluence);
    }
    Ok(Pgp2Score {
        candidate: candidate.to_vec(),
        surviving,
        total,
        value: Rational::new(surviving, total),
    })
}

#[derive(Serialize)]
struct RationalRepr {
    numerator: u64,
    denominator: u64,
    value: f64,
}

impl From<&Rational> for RationalRepr {
    fn from(r: &Rational) -> Self {
        Self {
            numerator: *r.numer(),
            denominator: *r.denom(),
            value: to_f64(r),
        }
    }
}

fn serialize_rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    RationalRepr::from(r).serialize(s)
}

fn serialize_rationals<S: Serializer>(r: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
    r.as_ref()
        .map(|v| v.iter().map(RationalRepr::from).collect::<Vec<_>>())
        .serialize(s)
}
