//! Execution trace of a progressive run.

use serde::{Deserialize, Serialize};

use super::system::{AssemblyCase, NodeStatus};
use crate::tree::NodeKey;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveOutcome {
    Solved,
    Singular,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeTrace {
    pub level: u32,
    pub residue: usize,
    pub label: Vec<usize>,
    pub case: AssemblyCase,
    /// Skewness after inheriting the child systems and before new rows;
    /// `None` for a null system.
    pub skew_before: Option<usize>,
    pub skew_after: Option<usize>,
    pub rows: usize,
    pub cols: usize,
    pub rows_added: usize,
    pub status: NodeStatus,
    /// Column order of the node system.
    pub unknowns: Vec<usize>,
    /// Shift of every row of the node system.
    pub shifts: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond: Option<f64>,
    /// Worst relative residual of the unused equations at a null node, when
    /// checked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub redundant_residual: Option<f64>,
}

impl NodeTrace {
    pub fn key(&self) -> NodeKey {
        NodeKey::new(self.level, self.residue)
    }

    pub fn mu(&self) -> usize {
        self.label.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub stage: u32,
    pub level: u32,
    pub fft_size: usize,
    pub shifts: Vec<u64>,
    pub nodes: Vec<NodeTrace>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub n: usize,
    pub eta: usize,
    pub r: u32,
    pub stages: Vec<StageTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl Trace {
    pub fn nodes(&self) -> impl Iterator<Item = &NodeTrace> {
        self.stages.iter().flat_map(|s| &s.nodes)
    }

    /// Labels of the nodes resolved at `stage`.
    pub fn resolved_at(&self, stage: u32) -> Vec<Vec<usize>> {
        self.stages
            .iter()
            .filter(|s| s.stage == stage)
            .flat_map(|s| &s.nodes)
            .filter(|n| n.status == NodeStatus::Resolved)
            .map(|n| n.label.clone())
            .collect()
    }
}
