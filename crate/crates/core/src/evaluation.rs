//! External evaluation of a clustering against held-out class labels.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;
use thiserror::Error;

use crate::partition::Partition;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("partition covers {partition} objects but {labels} labels were given")]
    LengthMismatch { partition: usize, labels: usize },
    #[error("partition is not a partition of 0..{0}")]
    NotAPartition(usize),
    #[error("nothing to evaluate")]
    Empty,
}

/// Cross-tabulation of true labels (rows, sorted) against clusters (columns,
/// in partition order).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContingencyTable {
    labels: Vec<String>,
    counts: Vec<Vec<usize>>,
}

pub fn contingency(partition: &Partition, labels: &[String]) -> Result<ContingencyTable, EvalError> {
    if labels.is_empty() {
        return Err(EvalError::Empty);
    }
    if partition.object_count() != labels.len() {
        return Err(EvalError::LengthMismatch {
            partition: partition.object_count(),
            labels: labels.len(),
        });
    }
    if !partition.covers(labels.len()) {
        return Err(EvalError::NotAPartition(labels.len()));
    }
    let rows: BTreeMap<&str, usize> = labels
        .iter()
        .map(String::as_str)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();
    let mut counts = vec![vec![0; partition.len()]; rows.len()];
    for (c, members) in partition.clusters().iter().enumerate() {
        for &o in members {
            counts[rows[labels[o].as_str()]][c] += 1;
        }
    }
    Ok(ContingencyTable {
        labels: rows.keys().map(|l| l.to_string()).collect(),
        counts,
    })
}

impl ContingencyTable {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn clusters(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    pub fn count(&self, label: usize, cluster: usize) -> usize {
        self.counts[label][cluster]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn label_totals(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        (0..self.clusters())
            .map(|c| self.counts.iter().map(|r| r[c]).sum())
            .collect()
    }

    fn majority(&self, cluster: usize) -> usize {
        self.counts.iter().map(|r| r[cluster]).max().unwrap_or(0)
    }

    /// Objects agreeing with their cluster's majority label.
    pub fn correctly_grouped(&self) -> usize {
        (0..self.clusters()).map(|c| self.majority(c)).sum()
    }

    /// `n` minus the sum of per-cluster majority counts.
    pub fn misclassified(&self) -> usize {
        self.total() - self.correctly_grouped()
    }

    /// Clusters holding more than one label.
    pub fn impure_clusters(&self) -> usize {
        (0..self.clusters())
            .filter(|&c| self.counts.iter().filter(|r| r[c] > 0).count() > 1)
            .count()
    }

    pub fn purity(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.correctly_grouped() as f64 / n as f64,
        }
    }

    /// CSV with a `label` column followed by clusters numbered from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for c in 1..=self.clusters() {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.counts) {
            out.push_str(label);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Aligned text table; zero cells print as `-`.
    pub fn to_text(&self) -> String {
        let width = self
            .labels
            .iter()
            .map(String::len)
            .chain([2, self.clusters().to_string().len()])
            .max()
            .unwrap_or(2);
        let mut out = format!("{:<width$}", "DT");
        for c in 1..=self.clusters() {
            let _ = write!(out, " {c:>3}");
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.counts) {
            let _ = write!(out, "{label:<width$}");
            for &v in row {
                if v == 0 {
                    let _ = write!(out, " {:>3}", "-");
                } else {
                    let _ = write!(out, " {v:>3}");
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Summary numbers of an evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSummary {
    pub objects: usize,
    pub clusters: usize,
    pub labels: usize,
    pub purity: f64,
    pub correctly_grouped: usize,
    pub misclassified: usize,
    pub impure_clusters: usize,
}

impl From<&ContingencyTable> for EvalSummary {
    fn from(t: &ContingencyTable) -> Self {
        Self {
            objects: t.total(),
            clusters: t.clusters(),
            labels: t.labels.len(),
            purity: t.purity(),
            correctly_grouped: t.correctly_grouped(),
            misclassified: t.misclassified(),
            impure_clusters: t.impure_clusters(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    /// Label-by-cluster counts as printed for the Soybean run (D1..D4 by clusters 1..18).
    const SOYBEAN_TABLE: [[usize; 18]; 4] = [
        [0, 3, 2, 0, 0, 0, 0, 0, 0, 2, 2, 0, 0, 0, 0, 0, 0, 1],
        [0, 0, 0, 3, 0, 0, 2, 2, 3, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 5, 2, 0, 0, 0, 0, 1],
        [5, 0, 0, 0, 0, 3, 0, 0, 0, 0, 0, 0, 0, 2, 3, 2, 2, 0],
    ];

    /// Expands a count table into a labelled partition, clusters laid out in order.
    fn expand(table: &[[usize; 18]; 4]) -> (Partition, Vec<String>) {
        let mut clusters = Vec::new();
        let mut labels = Vec::new();
        for c in 0..18 {
            let mut members = Vec::new();
            for (d, row) in table.iter().enumerate() {
                for _ in 0..row[c] {
                    members.push(labels.len());
                    labels.push(format!("D{}", d + 1));
                }
            }
            clusters.push(members);
        }
        (Partition::new(clusters), labels)
    }

    #[test]
    fn soybean_table_counts() {
        let (partition, labels) = expand(&SOYBEAN_TABLE);
        let table = contingency(&partition, &labels).unwrap();
        assert_eq!(table.total(), 47);
        assert_eq!(table.clusters(), 18);
        assert_eq!(table.label_totals(), [10, 10, 10, 17]);
        assert_eq!(table.count(3, 0), 5);
        assert_eq!(table.count(2, 11), 5);
        assert_eq!(table.correctly_grouped(), 46);
        assert_eq!(table.misclassified(), 1);
        assert_eq!(table.impure_clusters(), 1);
        assert!((table.purity() - 46.0 / 47.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_tables() {
        let one = contingency(&Partition::new(vec![vec![0, 1, 2]]), &strings(&["a", "a", "a"])).unwrap();
        assert_eq!((one.labels().len(), one.clusters(), one.count(0, 0)), (1, 1, 3));
        assert_eq!(one.purity(), 1.0);

        let split = contingency(&Partition::new(vec![vec![0, 1], vec![2, 3]]), &strings(&["a", "b", "a", "b"])).unwrap();
        assert_eq!(split.purity(), 0.5);
        assert_eq!(split.misclassified(), 2);
        assert_eq!(split.cluster_sizes(), [2, 2]);
    }

    #[test]
    fn errors() {
        let p = Partition::new(vec![vec![0, 1]]);
        assert_eq!(
            contingency(&p, &strings(&["a"])),
            Err(EvalError::LengthMismatch { partition: 2, labels: 1 })
        );
        assert_eq!(contingency(&p, &[]), Err(EvalError::Empty));
        let gap = Partition::new(vec![vec![0, 2]]);
        assert_eq!(contingency(&gap, &strings(&["a", "b"])), Err(EvalError::NotAPartition(2)));
    }

    #[test]
    fn pure_singleton_never_lowers_purity() {
        let base = contingency(&Partition::new(vec![vec![0, 1, 2]]), &strings(&["a", "a", "b"])).unwrap();
        let more = contingency(
            &Partition::new(vec![vec![0, 1], vec![2]]),
            &strings(&["a", "a", "b"]),
        )
        .unwrap();
        assert!(more.purity() >= base.purity());
    }

    #[test]
    fn renders() {
        let t = contingency(&Partition::new(vec![vec![0], vec![1, 2]]), &strings(&["x", "y", "y"])).unwrap();
        assert_eq!(t.to_csv(), "label,1,2\nx,1,0\ny,0,2\n");
        assert_eq!(t.to_text(), "DT   1   2\nx    1   -\ny    -   2\n");
    }
}
