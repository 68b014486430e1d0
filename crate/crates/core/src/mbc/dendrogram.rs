use std::collections::HashMap;
use std::fmt::Write;

use serde::Serialize;

use super::{MbcError, MergeEvent};
use crate::partition::Partition;

/// Partition recorded after one grouping step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Level {
    /// Iteration whose grouping produced this level; `None` for the leaves.
    pub iteration: Option<usize>,
    pub theta: u32,
    pub partition: Partition,
}

/// Leveled merge tree. Level 0 holds the singleton objects; level `p + 1`
/// holds the entity partition after the grouping step of iteration `p`.
/// Leaf node ids are object ids; merged nodes are numbered from `n` upward in
/// creation order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Dendrogram {
    objects: usize,
    levels: Vec<Level>,
    merges: Vec<MergeEvent>,
}

/// A dendrogram cut at a requested cluster count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cut {
    pub level: usize,
    pub requested: usize,
    pub achieved: usize,
    pub partition: Partition,
}

impl Dendrogram {
    pub fn new(objects: usize, theta: u32) -> Self {
        Self {
            objects,
            levels: vec![Level {
                iteration: None,
                theta,
                partition: Partition::singletons(objects),
            }],
            merges: Vec::new(),
        }
    }

    pub(crate) fn push_level(&mut self, iteration: usize, theta: u32, partition: Partition, merges: Vec<MergeEvent>) {
        self.levels.push(Level {
            iteration: Some(iteration),
            theta,
            partition,
        });
        self.merges.extend(merges);
    }

    pub fn objects(&self) -> usize {
        self.objects
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn merges(&self) -> &[MergeEvent] {
        &self.merges
    }

    /// Partition of the level whose cluster count is closest to `k`.
    ///
    /// Among equally close levels the coarser partition wins; among levels
    /// with the same count, the shallowest.
    pub fn cut_at_k(&self, k: usize) -> Result<Cut, MbcError> {
        if k == 0 {
            return Err(MbcError::InvalidK);
        }
        let (level, best) = self
            .levels
            .iter()
            .enumerate()
            .min_by_key(|(idx, l)| (l.partition.len().abs_diff(k), l.partition.len(), *idx))
            .ok_or(MbcError::EmptyDendrogram)?;
        Ok(Cut {
            level,
            requested: k,
            achieved: best.partition.len(),
            partition: best.partition.clone(),
        })
    }

    /// Newick text. Leaves are named by `leaf_name(object)`; branch lengths
    /// count levels. Several top-level nodes hang from an unnamed root one
    /// level above the last.
    pub fn to_newick(&self, leaf_name: impl Fn(usize) -> String) -> String {
        let mut children: HashMap<usize, &[usize]> = HashMap::new();
        let mut height: HashMap<usize, usize> = HashMap::new();
        let mut first_leaf: HashMap<usize, usize> = HashMap::new();
        let mut is_child: HashMap<usize, bool> = HashMap::new();
        for event in &self.merges {
            children.insert(event.parent, &event.children);
            height.insert(event.parent, event.iteration + 1);
            first_leaf.insert(event.parent, event.members[0]);
            for &c in &event.children {
                is_child.insert(c, true);
            }
        }
        let node_count = self.objects + self.merges.len();
        let mut roots: Vec<usize> = (0..node_count).filter(|n| !is_child.contains_key(n)).collect();
        roots.sort_by_key(|n| first_leaf.get(n).copied().unwrap_or(*n));

        fn write_node(
            out: &mut String,
            node: usize,
            children: &HashMap<usize, &[usize]>,
            height: &HashMap<usize, usize>,
            leaf_name: &dyn Fn(usize) -> String,
        ) {
            match children.get(&node) {
                None => out.push_str(&leaf_name(node)),
                Some(kids) => {
                    out.push('(');
                    let h = height[&node];
                    for (i, &kid) in kids.iter().enumerate() {
                        if i > 0 {
                            out.push(',');
                        }
                        write_node(out, kid, children, height, leaf_name);
                        let _ = write!(out, ":{}", h - height.get(&kid).copied().unwrap_or(0));
                    }
                    out.push(')');
                }
            }
        }

        let mut out = String::new();
        if let [root] = roots.as_slice() {
            write_node(&mut out, *root, &children, &height, &leaf_name);
        } else {
            let top = self.levels.len();
            out.push('(');
            for (i, &root) in roots.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_node(&mut out, root, &children, &height, &leaf_name);
                let _ = write!(out, ":{}", top - height.get(&root).copied().unwrap_or(0));
            }
            out.push(')');
        }
        out.push(';');
        out
    }
}
