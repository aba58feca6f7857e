//! Congruence trees.
//!
//! The node at level `l` with residue `c` carries the label
//! `{ j in J : j mod 2^l = c }`. Its left child is the "odd" class
//! (residue `c + 2^l` modulo `2^{l+1}`) and its right child the "even" class
//! (residue `c`). Empty classes are never materialized.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, SupportSet};

pub type NodeId = usize;

/// Canonical node identity: `(level, residue)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeKey {
    pub level: u32,
    pub residue: usize,
}

impl NodeKey {
    pub fn new(level: u32, residue: usize) -> Self {
        Self { level, residue }
    }

    pub fn parent(self) -> Option<NodeKey> {
        (self.level > 0).then(|| NodeKey::new(self.level - 1, self.residue % (1 << (self.level - 1))))
    }

    pub fn odd_child(self) -> NodeKey {
        NodeKey::new(self.level + 1, self.residue + (1 << self.level))
    }

    pub fn even_child(self) -> NodeKey {
        NodeKey::new(self.level + 1, self.residue)
    }
}

impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node(level {}, residue {})", self.level, self.residue)
    }
}

#[derive(Clone, Debug)]
pub struct TreeNode {
    pub key: NodeKey,
    /// Sorted members of the residue class.
    pub label: Vec<usize>,
    pub parent: Option<NodeId>,
    pub odd: Option<NodeId>,
    pub even: Option<NodeId>,
}

impl TreeNode {
    pub fn mu(&self) -> usize {
        self.label.len()
    }

    pub fn level(&self) -> u32 {
        self.key.level
    }

    pub fn residue(&self) -> usize {
        self.key.residue
    }

    /// Existing children, odd (left) first.
    pub fn children(&self) -> impl Iterator<Item = NodeId> {
        self.odd.into_iter().chain(self.even)
    }
}

#[derive(Clone, Debug)]
pub struct CongruenceTree {
    nodes: Vec<TreeNode>,
    index: HashMap<NodeKey, NodeId>,
    levels: Vec<Vec<NodeId>>,
    n: usize,
}

/// Build the congruence tree of `support`, truncated below level `r_max`.
pub fn build_tree(support: &SupportSet, r_max: u32) -> Result<CongruenceTree> {
    let m = support.m_log2();
    if r_max > m {
        return Err(Error::invalid(format!("tree depth {r_max} exceeds log2 N = {m}")));
    }
    let mut tree = CongruenceTree {
        nodes: Vec::with_capacity(support.len() * (r_max as usize + 1)),
        index: HashMap::new(),
        levels: vec![Vec::new(); r_max as usize + 1],
        n: support.n(),
    };
    let root = tree.push(NodeKey::new(0, 0), support.indices().to_vec(), None);
    tree.levels[0].push(root);

    for l in 0..r_max {
        let bit = 1usize << l;
        let parents = tree.levels[l as usize].clone();
        for pid in parents {
            let key = tree.nodes[pid].key;
            let (odd, even): (Vec<usize>, Vec<usize>) = tree.nodes[pid].label.iter().partition(|&&j| j & bit != 0);
            if !odd.is_empty() {
                let id = tree.push(key.odd_child(), odd, Some(pid));
                tree.nodes[pid].odd = Some(id);
                tree.levels[l as usize + 1].push(id);
            }
            if !even.is_empty() {
                let id = tree.push(key.even_child(), even, Some(pid));
                tree.nodes[pid].even = Some(id);
                tree.levels[l as usize + 1].push(id);
            }
        }
    }
    Ok(tree)
}

impl CongruenceTree {
    fn push(&mut self, key: NodeKey, label: Vec<usize>, parent: Option<NodeId>) -> NodeId {
        let id = self.nodes.len();
        self.index.insert(key, id);
        self.nodes.push(TreeNode {
            key,
            label,
            parent,
            odd: None,
            even: None,
        });
        id
    }

    pub fn root(&self) -> NodeId {
        0
    }

    /// Deepest retained level.
    pub fn r_max(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Size of the support set the tree was built from.
    pub fn k(&self) -> usize {
        self.nodes[0].mu()
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn find(&self, key: NodeKey) -> Option<NodeId> {
        self.index.get(&key).copied()
    }

    /// Nodes at level `l`, in left-to-right order. Empty past `r_max`.
    pub fn nodes_at_level(&self, l: u32) -> &[NodeId] {
        self.levels.get(l as usize).map_or(&[], Vec::as_slice)
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    /// Largest label size at level `r`, or 0 if the level is empty.
    pub fn mu_star(&self, r: u32) -> usize {
        self.nodes_at_level(r)
            .iter()
            .map(|&id| self.nodes[id].mu())
            .max()
            .unwrap_or(0)
    }

    /// Mean label size over the nodes at level `r`.
    pub fn lambda(&self, r: u32) -> f64 {
        self.k() as f64 / (1u64 << r) as f64
    }

    /// Left (odd) subtree, right (even) subtree, then the node itself.
    pub fn post_order(&self) -> Vec<NodeId> {
        self.post_order_from(self.root())
    }

    pub fn post_order_from(&self, start: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![(start, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                out.push(id);
                continue;
            }
            stack.push((id, true));
            let node = &self.nodes[id];
            // pushed in reverse so the odd child is visited first
            if let Some(e) = node.even {
                stack.push((e, false));
            }
            if let Some(o) = node.odd {
                stack.push((o, false));
            }
        }
        out
    }

    /// JSON dump of every node: level, residue, label, mu and, when supplied,
    /// a status string.
    pub fn to_json(&self, status: impl Fn(NodeKey) -> Option<String>) -> serde_json::Value {
        let nodes: Vec<_> = self
            .nodes
            .iter()
            .map(|n| {
                let mut obj = serde_json::json!({
                    "level": n.key.level,
                    "residue": n.key.residue,
                    "label": n.label,
                    "mu": n.mu(),
                });
                if let Some(s) = status(n.key) {
                    obj["status"] = serde_json::Value::String(s);
                }
                obj
            })
            .collect();
        serde_json::Value::Array(nodes)
    }
}
