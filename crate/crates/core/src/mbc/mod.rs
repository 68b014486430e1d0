//! The matching based clustering loop.
//!
//! Each iteration groups entities that coincide on every remaining feature,
//! stops once no object is left alone, and otherwise drops the least
//! important features, updates the similarity matrix and (optionally) blocks
//! clusters from merging with each other.

mod dendrogram;
mod state;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

pub use dendrogram::{Cut, Dendrogram, Level};
pub use state::{ClusteringState, Entity, MergeEvent};

use crate::dataset::Dataset;
use crate::importance::{pgp2, ImportanceMeasure, ImportanceReport};
use crate::partition::Partition;
use crate::similarity::SimilarityError;

#[derive(Debug, Error, PartialEq)]
pub enum MbcError {
    #[error("requested cluster count must be at least 1")]
    InvalidK,
    #[error("alpha must be a finite number")]
    InvalidAlpha,
    #[error("dendrogram has no levels")]
    EmptyDendrogram,
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

/// How to choose among features tied at the minimum importance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    /// Drop every tied feature.
    #[default]
    DropAll,
    /// Drop the single tied feature with the highest PGP2; lowest index on ties.
    Pgp2Single,
}

impl FromStr for TiePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "drop-all" => Ok(Self::DropAll),
            "pgp2" | "pgp2-single" => Ok(Self::Pgp2Single),
            other => Err(format!("unknown tie policy '{other}'")),
        }
    }
}

impl fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::DropAll => "drop-all",
            Self::Pgp2Single => "pgp2-single",
        })
    }
}

/// Population the importance frequencies are counted over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ImportancePopulation {
    /// Current entities, each merged cluster counted once.
    #[default]
    Entities,
    /// Original objects throughout.
    Objects,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MbcConfig {
    pub importance: ImportanceMeasure,
    pub ties: TiePolicy,
    pub anti_merge: bool,
    pub alpha: f64,
    /// Requested cluster count; when set the anti-merge rule is skipped and
    /// the dendrogram is cut.
    pub k: Option<usize>,
    pub population: ImportancePopulation,
}

impl Default for MbcConfig {
    fn default() -> Self {
        Self {
            importance: ImportanceMeasure::Pgp,
            ties: TiePolicy::DropAll,
            anti_merge: true,
            alpha: 0.0,
            k: None,
            population: ImportancePopulation::Entities,
        }
    }
}

impl MbcConfig {
    pub fn validate(&self) -> Result<(), MbcError> {
        if self.k == Some(0) {
            return Err(MbcError::InvalidK);
        }
        if !self.alpha.is_finite() {
            return Err(MbcError::InvalidAlpha);
        }
        Ok(())
    }

    /// Whether the anti-merge rule actually runs.
    pub fn anti_merge_active(&self) -> bool {
        self.anti_merge && self.k.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DropDecision {
    Drop(Vec<usize>),
    /// All remaining features are equally important.
    Terminate,
}

/// Chooses the features to drop from `report`. Under the PGP2 tie policy the
/// PGP2 scores of the tied candidates are appended to `report.pgp2`.
pub fn select_drop(state: &ClusteringState<'_>, report: &mut ImportanceReport, config: &MbcConfig) -> DropDecision {
    let Some(values) = report.values(config.importance) else {
        return DropDecision::Terminate;
    };
    let Some(min) = values.iter().min().copied() else {
        return DropDecision::Terminate;
    };
    let tied: Vec<usize> = report
        .features
        .iter()
        .zip(values)
        .filter(|(_, v)| **v == min)
        .map(|(&f, _)| f)
        .collect();
    if tied.len() == report.features.len() {
        return DropDecision::Terminate;
    }
    if tied.len() == 1 || config.ties == TiePolicy::DropAll {
        return DropDecision::Drop(tied);
    }

    let profiles = state.profiles();
    let mut best: Option<(usize, crate::importance::Rational)> = None;
    for &f in &tied {
        if let Ok(score) = pgp2(state.similarity(), &profiles, &[f], config.alpha) {
            if best.is_none_or(|(_, v)| score.value > v) {
                best = Some((f, score.value));
            }
            report.pgp2.push(score);
        }
    }
    DropDecision::Drop(vec![best.map_or(tied[0], |(f, _)| f)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    AllClustered,
    ImportanceTied,
    /// Importance could not be computed (fewer than two entities, or no
    /// feature separates/groups anything).
    NoImportanceInformation,
}

/// What happened in one iteration of the loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub theta: u32,
    /// Entities after grouping.
    pub entities: usize,
    pub merges: usize,
    pub unclustered: usize,
    pub report: Option<ImportanceReport>,
    pub dropped: Vec<usize>,
    /// Entries zeroed by the anti-merge rule after the drop.
    pub blocked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutput {
    pub partition: Partition,
    pub dendrogram: Dendrogram,
    pub trace: Vec<IterationRecord>,
    pub termination: Termination,
    pub anti_merge: bool,
    pub cut: Option<Cut>,
}

impl RunOutput {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// Runs the clustering loop to termination. Objects still alone at the end
/// become singleton clusters.
pub fn run(dataset: &Dataset, config: &MbcConfig) -> Result<RunOutput, MbcError> {
    config.validate()?;
    let anti_merge = config.anti_merge_active();
    let mut state = ClusteringState::new(dataset);
    let mut dendrogram = Dendrogram::new(dataset.n(), state.theta());
    let mut trace = Vec::new();

    let termination = loop {
        let merges = state.group_matching();
        let mut record = IterationRecord {
            iteration: state.iteration(),
            theta: state.theta(),
            entities: state.entities().len(),
            merges: merges.len(),
            unclustered: state.unclustered(),
            report: None,
            dropped: Vec::new(),
            blocked: 0,
        };
        dendrogram.push_level(state.iteration(), state.theta(), state.partition(), merges);

        if state.is_fully_clustered() {
            trace.push(record);
            break Termination::AllClustered;
        }
        let mut report = match state.importance(config.importance, config.population) {
            Ok(report) => report,
            Err(_) => {
                trace.push(record);
                break Termination::NoImportanceInformation;
            }
        };
        let decision = select_drop(&state, &mut report, config);
        record.report = Some(report);
        let dropped = match decision {
            DropDecision::Terminate => {
                trace.push(record);
                break Termination::ImportanceTied;
            }
            DropDecision::Drop(dropped) => dropped,
        };

        state.drop_features(&dropped)?;
        record.dropped = dropped;
        if anti_merge {
            record.blocked = state.anti_merge_update();
        }
        trace.push(record);
        state.next_iteration();
    };

    let cut = config.k.map(|k| dendrogram.cut_at_k(k)).transpose()?;
    let partition = cut.as_ref().map_or_else(|| state.partition(), |c| c.partition.clone());
    Ok(RunOutput {
        partition,
        dendrogram,
        trace,
        termination,
        anti_merge,
        cut,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LoadOptions;

    fn load(text: &str) -> Dataset {
        Dataset::from_reader(text.as_bytes(), &LoadOptions::default()).unwrap()
    }

    fn dataset_a() -> Dataset {
        load(include_str!("../../tests/data/dataset_a.csv"))
    }

    fn objects(ids: &[usize]) -> Vec<usize> {
        ids.iter().map(|o| o - 1).collect()
    }

    #[test]
    fn dataset_a_default_run() {
        let ds = dataset_a();
        let out = run(&ds, &MbcConfig::default()).unwrap();
        let expected = Partition::new(vec![
            objects(&[1, 2, 3, 4]),
            objects(&[5, 7, 10]),
            objects(&[6, 8]),
            objects(&[9]),
        ]);
        assert_eq!(out.partition, expected);
        assert_eq!(out.termination, Termination::ImportanceTied);
        let dropped: Vec<Vec<usize>> = out.trace.iter().map(|r| r.dropped.clone()).collect();
        assert_eq!(dropped, [vec![4], vec![2, 3], vec![]]);
        assert_eq!(out.trace.iter().map(|r| r.theta).collect::<Vec<_>>(), [5, 4, 2]);
    }

    #[test]
    fn object_population_gives_same_partition_on_dataset_a() {
        let ds = dataset_a();
        let config = MbcConfig {
            population: ImportancePopulation::Objects,
            ..Default::default()
        };
        let a = run(&ds, &config).unwrap();
        let b = run(&ds, &MbcConfig::default()).unwrap();
        assert_eq!(a.partition, b.partition);
    }

    #[test]
    fn select_drop_on_dataset_a() {
        let ds = dataset_a();
        let mut state = ClusteringState::new(&ds);
        state.group_matching();
        let config = MbcConfig::default();
        let mut report = state.importance(config.importance, config.population).unwrap();
        assert_eq!(select_drop(&state, &mut report, &config), DropDecision::Drop(vec![4]));
        state.drop_features(&[4]).unwrap();
        state.anti_merge_update();
        state.next_iteration();
        state.group_matching();
        let mut report = state.importance(config.importance, config.population).unwrap();
        assert_eq!(select_drop(&state, &mut report, &config), DropDecision::Drop(vec![2, 3]));

        let pgp2 = MbcConfig {
            ties: TiePolicy::Pgp2Single,
            ..Default::default()
        };
        let mut report = state.importance(pgp2.importance, pgp2.population).unwrap();
        // C and D tie on PGP2 as well, so the lower index goes.
        assert_eq!(select_drop(&state, &mut report, &pgp2), DropDecision::Drop(vec![2]));
        assert_eq!(report.pgp2.len(), 2);
    }

    #[test]
    fn all_tied_terminates() {
        let ds = load("a,b\nx,1\ny,2\nx,2\n");
        let state = ClusteringState::new(&ds);
        let config = MbcConfig::default();
        let mut report = state.importance(config.importance, config.population).unwrap();
        assert_eq!(select_drop(&state, &mut report, &config), DropDecision::Terminate);
    }

    #[test]
    fn identical_objects_form_one_cluster() {
        let ds = load("a,b\nx,1\nx,1\nx,1\nx,1\n");
        let out = run(&ds, &MbcConfig::default()).unwrap();
        assert_eq!(out.partition.len(), 1);
        assert_eq!(out.iterations(), 1);
        assert_eq!(out.termination, Termination::AllClustered);
    }

    #[test]
    fn single_object() {
        let ds = load("a\nx\n");
        let out = run(&ds, &MbcConfig::default()).unwrap();
        assert_eq!(out.partition, Partition::singletons(1));
        assert_eq!(out.termination, Termination::NoImportanceInformation);
    }

    #[test]
    fn dendrogram_mode_on_dataset_a() {
        let ds = dataset_a();
        let config = MbcConfig {
            anti_merge: false,
            ..Default::default()
        };
        let out = run(&ds, &config).unwrap();
        let counts: Vec<usize> = out.dendrogram.levels().iter().map(|l| l.partition.len()).collect();
        assert_eq!(counts, [10, 8, 4, 2]);
        assert_eq!(out.termination, Termination::AllClustered);
        let two = out.dendrogram.cut_at_k(2).unwrap();
        assert_eq!(
            two.partition,
            Partition::new(vec![objects(&[1, 2, 3, 4]), objects(&[5, 6, 7, 8, 9, 10])])
        );
        assert_eq!(out.dendrogram.cut_at_k(10).unwrap().level, 0);
    }

    #[test]
    fn requested_k_cuts_the_dendrogram() {
        let ds = dataset_a();
        let config = MbcConfig {
            k: Some(4),
            ..Default::default()
        };
        let out = run(&ds, &config).unwrap();
        assert!(!out.anti_merge);
        assert_eq!(out.cut.as_ref().unwrap().achieved, 4);
        assert_eq!(out.partition, run(&ds, &MbcConfig::default()).unwrap().partition);
    }

    #[test]
    fn invalid_config() {
        let ds = dataset_a();
        let bad_k = MbcConfig {
            k: Some(0),
            ..Default::default()
        };
        assert_eq!(run(&ds, &bad_k).unwrap_err(), MbcError::InvalidK);
        let bad_alpha = MbcConfig {
            alpha: f64::NAN,
            ..Default::default()
        };
        assert_eq!(run(&ds, &bad_alpha).unwrap_err(), MbcError::InvalidAlpha);
    }

    #[test]
    fn policy_names() {
        assert_eq!("pgp2".parse::<TiePolicy>().unwrap(), TiePolicy::Pgp2Single);
        assert_eq!(TiePolicy::DropAll.to_string().parse::<TiePolicy>().unwrap(), TiePolicy::DropAll);
        assert!("random".parse::<TiePolicy>().is_err());
    }
}
