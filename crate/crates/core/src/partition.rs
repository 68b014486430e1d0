//! Canonical partitions of object ids.

use serde::Serialize;

/// A set of disjoint clusters of object ids.
///
/// Canonical form: members ascending inside each cluster, clusters ordered by
/// their smallest member. Two partitions compare equal iff they group the
/// same objects together.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Partition {
    clusters: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(mut clusters: Vec<Vec<usize>>) -> Self {
        clusters.retain(|c| !c.is_empty());
        for c in &mut clusters {
            c.sort_unstable();
        }
        clusters.sort_unstable_by_key(|c| c[0]);
        Self { clusters }
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            clusters: (0..n).map(|i| vec![i]).collect(),
        }
    }

    /// Groups objects by cluster label; label values are arbitrary.
    pub fn from_assignment<L: PartialEq>(labels: &[L]) -> Self {
        let mut keys: Vec<&L> = Vec::new();
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for (object, label) in labels.iter().enumerate() {
            match keys.iter().position(|k| *k == label) {
                Some(c) => clusters[c].push(object),
                None => {
                    keys.push(label);
                    clusters.push(vec![object]);
                }
            }
        }
        Self::new(clusters)
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn object_count(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }

    /// Cluster index of every object. Panics unless the clusters cover `0..n`.
    pub fn assignment(&self) -> Vec<usize> {
        let n = self.object_count();
        let mut out = vec![usize::MAX; n];
        for (c, members) in self.clusters.iter().enumerate() {
            for &o in members {
                out[o] = c;
            }
        }
        assert!(out.iter().all(|&c| c != usize::MAX), "partition does not cover 0..n");
        out
    }

    /// True iff every object of `0..n` is in exactly one cluster.
    pub fn covers(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for &o in self.clusters.iter().flatten() {
            if o >= n || std::mem::replace(&mut seen[o], true) {
                return false;
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// True iff every cluster of `finer` lies inside one cluster of `self`.
    pub fn is_coarsening_of(&self, finer: &Partition) -> bool {
        let n = self.object_count();
        if finer.object_count() != n {
            return false;
        }
        let coarse = self.assignment();
        finer
            .clusters
            .iter()
            .all(|c| c.iter().all(|&o| coarse[o] == coarse[c[0]]))
    }

    /// Renames objects: object `i` becomes `mapping[i]`.
    pub fn relabel(&self, mapping: &[usize]) -> Self {
        Self::new(
            self.clusters
                .iter()
                .map(|c| c.iter().map(|&o| mapping[o]).collect())
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let a = Partition::new(vec![vec![3, 1], vec![0], vec![2]]);
        let b = Partition::from_assignment(&["x", "y", "z", "y"]);
        assert_eq!(a, b);
        assert_eq!(a.clusters(), [vec![0], vec![1, 3], vec![2]]);
        assert_eq!(a.assignment(), [0, 1, 2, 1]);
        assert!(a.covers(4));
        assert!(!a.covers(5));
    }

    #[test]
    fn coarsening() {
        let fine = Partition::new(vec![vec![0], vec![1], vec![2, 3]]);
        let coarse = Partition::new(vec![vec![0, 1], vec![2, 3]]);
        assert!(coarse.is_coarsening_of(&fine));
        assert!(!fine.is_coarsening_of(&coarse));
        assert!(fine.is_coarsening_of(&fine));
    }
}
