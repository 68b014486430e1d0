use serde::Serialize;

use crate::dataset::{CategoryId, Dataset, FrequencyTable};
use crate::importance::{self, ImportanceError, ImportanceMeasure, ImportanceReport};
use crate::partition::Partition;
use crate::similarity::{pair_count, tri_index, SimilarityError, SimilarityMatrix};

use super::ImportancePopulation;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub(crate) struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// A current row of the reduced data view: one unclustered object, or a
/// cluster whose members share a profile on the remaining features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Entity {
    node: usize,
    members: Vec<usize>,
}

impl Entity {
    /// Dendrogram node id. Leaves are the object ids `0..n`.
    pub fn node(&self) -> usize {
        self.node
    }

    /// Member object ids, ascending.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// Object whose encoded row stands for the entity's profile.
    pub fn representative(&self) -> usize {
        self.members[0]
    }

    pub fn is_cluster(&self) -> bool {
        self.members.len() > 1
    }
}

/// One grouping step: `children` entities merged into node `parent`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MergeEvent {
    pub iteration: usize,
    pub theta: u32,
    pub children: Vec<usize>,
    pub parent: usize,
    pub members: Vec<usize>,
}

/// State of the clustering loop between steps.
///
/// `similarity()` always holds true CM scores. Entries zeroed by the
/// anti-merge rule are tracked separately as blocked pairs, visible through
/// [`ClusteringState::effective_similarity`]; they are cleared whenever
/// features are dropped and re-derived by the next anti-merge update.
#[derive(Debug, Clone)]
pub struct ClusteringState<'a> {
    dataset: &'a Dataset,
    entities: Vec<Entity>,
    remaining: Vec<usize>,
    sm: SimilarityMatrix,
    blocked: Vec<bool>,
    iteration: usize,
    next_node: usize,
}

impl<'a> ClusteringState<'a> {
    pub fn new(dataset: &'a Dataset) -> Self {
        let n = dataset.n();
        let remaining: Vec<usize> = (0..dataset.m()).collect();
        let entities: Vec<Entity> = (0..n)
            .map(|o| Entity {
                node: o,
                members: vec![o],
            })
            .collect();
        let profiles: Vec<&[CategoryId]> = (0..n).map(|o| dataset.row(o)).collect();
        let sm = SimilarityMatrix::build(&profiles, &remaining);
        Self {
            dataset,
            entities,
            remaining,
            blocked: vec![false; pair_count(n)],
            sm,
            iteration: 0,
            next_node: n,
        }
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn remaining_features(&self) -> &[usize] {
        &self.remaining
    }

    /// `θ_p`: count of remaining features.
    pub fn theta(&self) -> u32 {
        self.remaining.len() as u32
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn next_iteration(&mut self) {
        self.iteration += 1;
    }

    /// True CM scores between current entities.
    pub fn similarity(&self) -> &SimilarityMatrix {
        &self.sm
    }

    pub fn is_blocked(&self, i: usize, j: usize) -> bool {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.blocked[tri_index(self.entities.len(), i, j)]
    }

    /// The similarity matrix with blocked entries zeroed.
    pub fn effective_similarity(&self) -> SimilarityMatrix {
        let mut sm = self.sm.clone();
        for (i, j, _) in self.sm.pairs() {
            if self.is_blocked(i, j) {
                sm.set(i, j, 0);
            }
        }
        sm
    }

    pub fn profiles(&self) -> Vec<&'a [CategoryId]> {
        self.entities
            .iter()
            .map(|e| self.dataset.row(e.representative()))
            .collect()
    }

    /// Entities that are still single objects.
    pub fn unclustered(&self) -> usize {
        self.entities.iter().filter(|e| !e.is_cluster()).count()
    }

    pub fn is_fully_clustered(&self) -> bool {
        self.unclustered() == 0
    }

    pub fn partition(&self) -> Partition {
        Partition::new(self.entities.iter().map(|e| e.members.clone()).collect())
    }

    /// Groups every unblocked entity pair scoring `θ_p` (identical on all
    /// remaining features), merging connected components.
    pub fn group_matching(&mut self) -> Vec<MergeEvent> {
        let theta = self.theta();
        let size = self.entities.len();
        let mut dsu = DisjointSet::new(size);
        for (i, j, score) in self.sm.pairs() {
            if score == theta && !self.blocked[tri_index(size, i, j)] {
                dsu.union(i, j);
            }
        }

        let mut slot = vec![usize::MAX; size];
        let mut components: Vec<Vec<usize>> = Vec::new();
        for i in 0..size {
            let root = dsu.find(i);
            if slot[root] == usize::MAX {
                slot[root] = components.len();
                components.push(Vec::new());
            }
            components[slot[root]].push(i);
        }
        if components.len() == size {
            return Vec::new();
        }

        let mut events = Vec::new();
        let mut entities = Vec::with_capacity(components.len());
        for component in &components {
            if let [only] = component.as_slice() {
                entities.push(self.entities[*only].clone());
                continue;
            }
            let mut members: Vec<usize> = component
                .iter()
                .flat_map(|&i| self.entities[i].members.iter().copied())
                .collect();
            members.sort_unstable();
            let parent = self.next_node;
            self.next_node += 1;
            events.push(MergeEvent {
                iteration: self.iteration,
                theta,
                children: component.iter().map(|&i| self.entities[i].node).collect(),
                parent,
                members: members.clone(),
            });
            entities.push(Entity { node: parent, members });
        }

        let reps: Vec<usize> = components.iter().map(|c| c[0]).collect();
        let mut blocked = Vec::with_capacity(pair_count(reps.len()));
        for a in 0..reps.len() {
            for b in a + 1..reps.len() {
                blocked.push(self.blocked[tri_index(size, reps[a], reps[b])]);
            }
        }
        self.sm = self.sm.select(&reps);
        self.blocked = blocked;
        self.entities = entities;
        events
    }

    pub fn frequency_table(&self, population: ImportancePopulation) -> FrequencyTable {
        match population {
            ImportancePopulation::Entities => {
                FrequencyTable::from_profiles(self.profiles(), &self.dataset.category_counts())
            }
            ImportancePopulation::Objects => self.dataset.frequency_table(),
        }
    }

    /// Importance of the remaining features over the chosen population.
    pub fn importance(
        &self,
        measure: ImportanceMeasure,
        population: ImportancePopulation,
    ) -> Result<ImportanceReport, ImportanceError> {
        importance::importance(&self.frequency_table(population), &self.remaining, measure)
    }

    /// Drops features and updates the similarity matrix incrementally.
    /// Clears all blocked pairs.
    pub fn drop_features(&mut self, dropped: &[usize]) -> Result<(), SimilarityError> {
        self.sm = self.sm.after_drop(&self.profiles(), dropped)?;
        self.remaining.retain(|f| !dropped.contains(f));
        self.blocked.iter_mut().for_each(|b| *b = false);
        Ok(())
    }

    /// Anti-merge rule: for every pair of existing clusters scoring `θ_p`,
    /// every `θ_p` entry in either cluster's row or column is zeroed.
    /// Returns the number of newly zeroed entries.
    pub fn anti_merge_update(&mut self) -> usize {
        let theta = self.theta();
        let size = self.entities.len();
        let clusters: Vec<usize> = (0..size).filter(|&i| self.entities[i].is_cluster()).collect();
        let at_theta = |s: &Self, i: usize, j: usize| s.sm.get(i, j) == theta && !s.is_blocked(i, j);

        let mut affected = vec![false; size];
        for (a, &i) in clusters.iter().enumerate() {
            for &j in &clusters[a + 1..] {
                if at_theta(self, i, j) {
                    affected[i] = true;
                    affected[j] = true;
                }
            }
        }

        let mut zeroed = 0;
        for i in (0..size).filter(|&i| affected[i]) {
            for k in (0..size).filter(|&k| k != i) {
                if at_theta(self, i, k) {
                    let (a, b) = if i < k { (i, k) } else { (k, i) };
                    self.blocked[tri_index(size, a, b)] = true;
                    zeroed += 1;
                }
            }
        }
        zeroed
    }
}
