//! Merging trees recovered from an execution trace.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::system::NodeStatus;
use super::trace::{NodeTrace, SolveOutcome, Trace};
use crate::tree::NodeKey;

/// A root system together with the unresolved subtree that fed it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergingTree {
    pub root: NodeKey,
    /// Root first, then the unresolved members in post-order.
    pub members: Vec<NodeKey>,
    pub leaves: Vec<NodeKey>,
    pub leaf_mu: Vec<usize>,
    pub leaf_skew: Vec<usize>,
    pub weight: usize,
    pub height: u32,
    pub skew: usize,
    pub rows: usize,
    pub cols: usize,
    /// The root system reached zero skewness (and a solve was attempted).
    pub complete: bool,
    pub singular: bool,
}

impl MergingTree {
    pub fn node_count(&self) -> usize {
        self.members.len()
    }
}

/// Lower bound `2y - 1 + h - log2 y` on the node count of a merging tree
/// with `y` leaves and height `h`.
pub fn node_count_bound(leaves: usize, height: u32) -> f64 {
    let y = leaves as f64;
    2.0 * y - 1.0 + height as f64 - y.log2()
}

/// Every merging tree of a run: one per node that attempted a solve, plus
/// one per unresolved node whose parent was never reached.
pub fn extract_merging_trees(trace: &Trace) -> Vec<MergingTree> {
    let index: HashMap<NodeKey, &NodeTrace> = trace.nodes().map(|n| (n.key(), n)).collect();
    let mut out = Vec::new();
    for node in trace.nodes() {
        let attempted = node.solve.is_some();
        let orphan = node.status == NodeStatus::Unresolved
            && !attempted
            && node.key().parent().is_none_or(|p| !index.contains_key(&p));
        if attempted || orphan {
            out.push(collect(node, &index, trace.r));
        }
    }
    out
}

fn collect(root: &NodeTrace, index: &HashMap<NodeKey, &NodeTrace>, r: u32) -> MergingTree {
    let mut members = vec![root.key()];
    let mut leaves = Vec::new();
    let mut stack = vec![(root.key(), false)];
    let mut post = Vec::new();
    while let Some((key, expanded)) = stack.pop() {
        if expanded {
            post.push(key);
            continue;
        }
        stack.push((key, true));
        if key.level == r {
            leaves.push(key);
            continue;
        }
        // push even first so that the odd subtree is visited first
        for child in [key.even_child(), key.odd_child()] {
            if let Some(c) = index.get(&child) {
                if c.status == NodeStatus::Unresolved && c.solve.is_none() {
                    stack.push((child, false));
                }
            }
        }
    }
    post.pop();
    members.extend(post);
    leaves.sort_by_key(|k| members.iter().position(|m| m == k));

    let leaf_mu: Vec<usize> = leaves.iter().map(|k| index[k].mu()).collect();
    let leaf_skew = leaves.iter().map(|k| index[k].skew_after.unwrap_or(0)).collect();
    MergingTree {
        root: root.key(),
        members,
        weight: leaf_mu.iter().sum(),
        leaves,
        leaf_mu,
        leaf_skew,
        height: r - root.level,
        skew: root.skew_after.unwrap_or(0),
        rows: root.rows,
        cols: root.cols,
        complete: root.solve.is_some(),
        singular: root.solve == Some(SolveOutcome::Singular),
    }
}

/// Summary of the merging trees of one run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MergingCensus {
    pub trees: usize,
    pub nontrivial: usize,
    pub complete: usize,
    pub singular: usize,
    pub max_height: u32,
    pub max_weight: usize,
}

impl MergingCensus {
    pub fn from_trees(trees: &[MergingTree]) -> Self {
        Self {
            trees: trees.len(),
            nontrivial: trees.iter().filter(|t| t.height > 0).count(),
            complete: trees.iter().filter(|t| t.complete).count(),
            singular: trees.iter().filter(|t| t.singular).count(),
            max_height: trees.iter().map(|t| t.height).max().unwrap_or(0),
            max_weight: trees.iter().map(|t| t.weight).max().unwrap_or(0),
        }
    }
}
