//! Serialized outputs: assignments CSV, dendrogram JSON/Newick, iteration
//! trace, importance rankings and the run manifest.
//!
//! Object ids, cluster ids and dendrogram node ids are 1-based in every
//! output. Leaf node `i` is object `i`; merged nodes follow from `n + 1`.

use std::fmt::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::dataset::{CategoryId, Dataset};
use crate::importance::{pgp2, to_f64, ImportanceError, ImportanceMeasure, Rational};
use crate::mbc::{Cut, Dendrogram, IterationRecord, MbcConfig, RunOutput, Termination};
use crate::partition::Partition;
use crate::similarity::SimilarityMatrix;

fn one_based(ids: &[usize]) -> Vec<usize> {
    ids.iter().map(|i| i + 1).collect()
}

fn rational(r: &Rational) -> Value {
    json!({ "numerator": r.numer(), "denominator": r.denom(), "value": to_f64(r) })
}

/// `object,cluster` rows in object order.
pub fn assignments_csv(partition: &Partition) -> String {
    let mut out = String::from("object,cluster\n");
    for (object, cluster) in partition.assignment().iter().enumerate() {
        let _ = writeln!(out, "{},{}", object + 1, cluster + 1);
    }
    out
}

pub fn partition_json(partition: &Partition) -> Value {
    Value::from(
        partition
            .clusters()
            .iter()
            .map(|c| Value::from(one_based(c)))
            .collect::<Vec<_>>(),
    )
}

pub fn dendrogram_json(dendrogram: &Dendrogram) -> Value {
    let levels: Vec<Value> = dendrogram
        .levels()
        .iter()
        .enumerate()
        .map(|(level, l)| {
            json!({
                "level": level,
                "iteration": l.iteration,
                "theta": l.theta,
                "clusters": partition_json(&l.partition),
            })
        })
        .collect();
    let merges: Vec<Value> = dendrogram
        .merges()
        .iter()
        .map(|m| {
            json!({
                "iteration": m.iteration,
                "theta": m.theta,
                "children": one_based(&m.children),
                "parent": m.parent + 1,
                "members": one_based(&m.members),
            })
        })
        .collect();
    json!({ "objects": dendrogram.objects(), "levels": levels, "merges": merges })
}

pub fn dendrogram_newick(dendrogram: &Dendrogram) -> String {
    dendrogram.to_newick(|o| format!("O{}", o + 1))
}

fn feature_names(ds: &Dataset, features: &[usize]) -> Vec<String> {
    features.iter().map(|&f| ds.feature_names()[f].clone()).collect()
}

/// Per-iteration trace with feature names resolved.
pub fn trace_json(ds: &Dataset, trace: &[IterationRecord]) -> Value {
    let records: Vec<Value> = trace
        .iter()
        .map(|r| {
            let importance = r.report.as_ref().map(|report| {
                report
                    .features
                    .iter()
                    .enumerate()
                    .map(|(pos, &f)| {
                        json!({
                            "feature": ds.feature_names()[f],
                            "match_pairs": report.match_pairs[pos],
                            "mismatch_pairs": report.mismatch_pairs[pos],
                            "pgp": report.pgp.as_ref().map(|v| rational(&v[pos])),
                            "ppp": report.ppp.as_ref().map(|v| rational(&v[pos])),
                        })
                    })
                    .collect::<Vec<_>>()
            });
            let pgp2: Vec<Value> = r
                .report
                .iter()
                .flat_map(|report| &report.pgp2)
                .map(|s| {
                    json!({
                        "candidate": feature_names(ds, &s.candidate),
                        "surviving": s.surviving,
                        "total": s.total,
                        "value": rational(&s.value),
                    })
                })
                .collect();
            json!({
                "iteration": r.iteration,
                "theta": r.theta,
                "entities": r.entities,
                "merges": r.merges,
                "unclustered": r.unclustered,
                "population": r.report.as_ref().map(|rep| rep.population),
                "importance": importance,
                "pgp2": pgp2,
                "dropped": feature_names(ds, &r.dropped),
                "blocked_entries": r.blocked,
            })
        })
        .collect();
    Value::from(records)
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestStep {
    pub iteration: usize,
    pub theta: u32,
    pub dropped: Vec<String>,
}

/// Record of one clustering run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub input: String,
    pub config: MbcConfig,
    pub anti_merge_applied: bool,
    pub objects: usize,
    pub features: usize,
    pub iterations: usize,
    pub steps: Vec<ManifestStep>,
    pub termination: Termination,
    pub clusters: usize,
    pub cut: Option<CutSummary>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CutSummary {
    pub requested: usize,
    pub achieved: usize,
    pub level: usize,
}

impl From<&Cut> for CutSummary {
    fn from(c: &Cut) -> Self {
        Self {
            requested: c.requested,
            achieved: c.achieved,
            level: c.level,
        }
    }
}

impl RunManifest {
    pub fn new(input: &str, ds: &Dataset, config: &MbcConfig, out: &RunOutput, elapsed_ms: f64) -> Self {
        Self {
            input: input.to_string(),
            config: config.clone(),
            anti_merge_applied: out.anti_merge,
            objects: ds.n(),
            features: ds.m(),
            iterations: out.iterations(),
            steps: out
                .trace
                .iter()
                .map(|r| ManifestStep {
                    iteration: r.iteration,
                    theta: r.theta,
                    dropped: feature_names(ds, &r.dropped),
                })
                .collect(),
            termination: out.termination,
            clusters: out.partition.len(),
            cut: out.cut.as_ref().map(CutSummary::from),
            elapsed_ms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankingMeasure {
    Pgp,
    Ppp,
    Pgp2,
}

/// One row of an importance ranking.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedFeature {
    pub rank: usize,
    pub feature: String,
    pub numerator: u64,
    pub denominator: u64,
    #[serde(skip)]
    pub exact: Rational,
    pub value: f64,
}

/// Features of the whole dataset ranked by decreasing importance, ties in
/// column order. PGP2 scores each feature as a single-feature candidate.
pub fn rank_features(ds: &Dataset, measure: RankingMeasure, alpha: f64) -> Result<Vec<RankedFeature>, ImportanceError> {
    let features: Vec<usize> = (0..ds.m()).collect();
    let mut rows: Vec<(usize, u64, u64, Rational)> = match measure {
        RankingMeasure::Pgp | RankingMeasure::Ppp => {
            let m = if measure == RankingMeasure::Pgp {
                ImportanceMeasure::Pgp
            } else {
                ImportanceMeasure::Ppp
            };
            let report = crate::importance::importance(&ds.frequency_table(), &features, m)?;
            let den = report.denominator(m);
            let values = report.values(m).expect("computed above");
            features
                .iter()
                .map(|&f| (f, report.numerators(m)[f], den, values[f]))
                .collect()
        }
        RankingMeasure::Pgp2 => {
            let profiles: Vec<&[CategoryId]> = (0..ds.n()).map(|o| ds.row(o)).collect();
            let sm = SimilarityMatrix::build(&profiles, &features);
            features
                .iter()
                .map(|&f| pgp2(&sm, &profiles, &[f], alpha).map(|s| (f, s.surviving, s.total, s.value)))
                .collect::<Result<_, _>>()?
        }
    };
    rows.sort_by(|a, b| b.3.cmp(&a.3).then(a.0.cmp(&b.0)));
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(i, (f, numerator, denominator, exact))| RankedFeature {
            rank: i + 1,
            feature: ds.feature_names()[f].clone(),
            numerator,
            denominator,
            exact,
            value: to_f64(&exact),
        })
        .collect())
}

pub fn ranking_text(rows: &[RankedFeature]) -> String {
    let width = rows.iter().map(|r| r.feature.len()).chain([7]).max().unwrap_or(7);
    let mut out = format!("{:>4}  {:<width$}  {:>10}  {:>11}  {:>8}\n", "rank", "feature", "numerator", "denominator", "value");
    for r in rows {
        let _ = writeln!(
            out,
            "{:>4}  {:<width$}  {:>10}  {:>11}  {:>8.4}",
            r.rank, r.feature, r.numerator, r.denominator, r.value
        );
    }
    out
}

/// Full matrix as CSV with an `object` column, objects numbered from 1.
pub fn matrix_csv(matrix: &[Vec<f64>]) -> String {
    let mut out = String::from("object");
    for j in 1..=matrix.len() {
        let _ = write!(out, ",{j}");
    }
    out.push('\n');
    for (i, row) in matrix.iter().enumerate() {
        let _ = write!(out, "{}", i + 1);
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}
