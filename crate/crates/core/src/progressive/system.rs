//! Per-node systems and their assembly from child systems.

use serde::{Deserialize, Serialize};

use crate::linalg::DenseMatrix;
use crate::ops::OpCount;
use crate::signal::unit_root;
use crate::tree::TreeNode;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeStatus {
    Unresolved,
    Resolved,
    NullSystem,
}

/// Which assembly rule produced a node system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum AssemblyCase {
    /// Every child is resolved: the new equations are redundant.
    Null = 1,
    /// Both children unresolved: block-diagonal merge.
    Merge = 2,
    /// One child unresolved: its system is carried up.
    Propagate = 3,
    /// Node at the starting level.
    Leaf = 4,
}

impl From<AssemblyCase> for u8 {
    fn from(c: AssemblyCase) -> u8 {
        c as u8
    }
}

impl TryFrom<u8> for AssemblyCase {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(AssemblyCase::Null),
            2 => Ok(AssemblyCase::Merge),
            3 => Ok(AssemblyCase::Propagate),
            4 => Ok(AssemblyCase::Leaf),
            _ => Err(format!("no assembly case {v}")),
        }
    }
}

/// Equations accumulated at one node. Column `c` belongs to `unknowns[c]`;
/// row `i` was measured at shift `shifts_used[i]`.
#[derive(Clone, Debug, Serialize)]
pub struct NodeSystem {
    pub unknowns: Vec<usize>,
    pub matrix: DenseMatrix,
    pub rhs: Vec<C64>,
    pub shifts_used: Vec<u64>,
    pub status: NodeStatus,
}

impl NodeSystem {
    pub fn null() -> Self {
        Self {
            unknowns: Vec::new(),
            matrix: DenseMatrix::zeros(0, 0),
            rhs: Vec::new(),
            shifts_used: Vec::new(),
            status: NodeStatus::NullSystem,
        }
    }

    fn empty(unknowns: Vec<usize>) -> Self {
        let cols = unknowns.len();
        Self {
            unknowns,
            matrix: DenseMatrix::zeros(0, cols),
            rhs: Vec::new(),
            shifts_used: Vec::new(),
            status: NodeStatus::Unresolved,
        }
    }

    /// Columns minus rows.
    pub fn skewness(&self) -> Result<usize> {
        if self.status == NodeStatus::NullSystem {
            return Err(Error::NullSystem);
        }
        Ok(self.matrix.cols() - self.matrix.rows())
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn is_unresolved(&self) -> bool {
        self.status == NodeStatus::Unresolved
    }

    fn block_diag(&self, other: &NodeSystem) -> NodeSystem {
        NodeSystem {
            unknowns: self.unknowns.iter().chain(&other.unknowns).copied().collect(),
            matrix: self.matrix.block_diag(&other.matrix),
            rhs: self.rhs.iter().chain(&other.rhs).copied().collect(),
            shifts_used: self.shifts_used.iter().chain(&other.shifts_used).copied().collect(),
            status: NodeStatus::Unresolved,
        }
    }
}

/// The aliased spectra of one stage: `spectra[i]` was measured at shift
/// `first_shift + i`.
#[derive(Clone, Copy, Debug)]
pub struct StageValues<'a> {
    pub n: usize,
    pub first_shift: u64,
    pub spectra: &'a [Vec<C64>],
}

impl StageValues<'_> {
    pub fn len(&self) -> usize {
        self.spectra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectra.is_empty()
    }

    pub fn shift(&self, i: usize) -> u64 {
        self.first_shift + i as u64
    }

    pub fn value(&self, i: usize, residue: usize) -> C64 {
        self.spectra[i][residue]
    }
}

/// `value - sum_j c_j e^{-2 pi i t j / N}` over the known pairs `(j, c_j)`.
pub fn subtract_known(value: C64, known: &[(usize, C64)], t: u64, n: usize, ops: &mut OpCount) -> C64 {
    let mut v = value;
    for &(j, c) in known {
        v -= c * unit_root(t, j, n);
    }
    ops.mul(known.len() as u64);
    ops.add(known.len() as u64);
    v
}

/// Build the system of `node` for the current stage.
///
/// `children` holds the previous-stage systems of the odd and even child
/// (`None` for an absent class); `leaf` marks a node at the starting level.
/// `known(j)` returns the resolved coefficient of `j`, if any. The returned
/// system is never resolved here; a square result is left for the caller to
/// solve.
pub fn assemble_node_system(
    node: &TreeNode,
    leaf: bool,
    children: [Option<&NodeSystem>; 2],
    eta: usize,
    stage: &StageValues<'_>,
    known: impl Fn(usize) -> Option<C64>,
    ops: &mut OpCount,
) -> (AssemblyCase, NodeSystem) {
    let open: Vec<&NodeSystem> = children.into_iter().flatten().filter(|c| c.is_unresolved()).collect();
    let (case, mut system) = if leaf {
        (AssemblyCase::Leaf, NodeSystem::empty(node.label.clone()))
    } else {
        match open.as_slice() {
            [] => return (AssemblyCase::Null, NodeSystem::null()),
            [one] => (AssemblyCase::Propagate, (*one).clone()),
            [odd, even] => (AssemblyCase::Merge, odd.block_diag(even)),
            _ => unreachable!("a node has at most two children"),
        }
    };

    let skew = system.cols() - system.rows();
    let add = eta.min(skew).min(stage.len());
    if add > 0 {
        let resolved: Vec<(usize, C64)> = if system.unknowns.len() == node.mu() {
            Vec::new()
        } else {
            let mut unknowns = system.unknowns.clone();
            unknowns.sort_unstable();
            node.label
                .iter()
                .filter(|j| unknowns.binary_search(j).is_err())
                .map(|&j| {
                    (
                        j,
                        known(j).expect("coefficients outside the open children are resolved"),
                    )
                })
                .collect()
        };
        for i in 0..add {
            let t = stage.shift(i);
            let row: Vec<C64> = system.unknowns.iter().map(|&j| unit_root(t, j, stage.n)).collect();
            system.matrix.push_row(&row);
            system.rhs.push(subtract_known(
                stage.value(i, node.residue()),
                &resolved,
                t,
                stage.n,
                ops,
            ));
            system.shifts_used.push(t);
        }
    }
    (case, system)
}

/// Largest residual of the redundant equations at a null node, relative to
/// the largest magnitude involved.
pub(crate) fn redundant_residual(
    node: &TreeNode,
    eta: usize,
    stage: &StageValues<'_>,
    known: impl Fn(usize) -> Option<C64>,
) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..eta.min(stage.len()) {
        let t = stage.shift(i);
        let measured = stage.value(i, node.residue());
        let mut predicted = C64::new(0.0, 0.0);
        let mut scale = measured.norm();
        for &j in &node.label {
            let c = known(j).unwrap_or_default();
            scale = scale.max(c.norm());
            predicted += c * unit_root(t, j, stage.n);
        }
        if scale > 0.0 {
            worst = worst.max((measured - predicted).norm() / scale);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(level: u32, residue: usize, label: Vec<usize>) -> TreeNode {
        TreeNode {
            key: crate::tree::NodeKey::new(level, residue),
            label,
            parent: None,
            odd: None,
            even: None,
        }
    }

    fn stage(spectra: &[Vec<C64>], first_shift: u64) -> StageValues<'_> {
        StageValues {
            n: 1024,
            first_shift,
            spectra,
        }
    }

    #[test]
    fn subtract_known_without_terms_is_identity() {
        let mut ops = OpCount::new();
        let v = C64::new(1.5, -2.0);
        assert_eq!(subtract_known(v, &[], 3, 1024, &mut ops), v);
        assert_eq!(ops.total(), 0);
    }

    #[test]
    fn subtract_known_isolates_remaining_term() {
        let (a, b) = (C64::new(0.3, 0.1), C64::new(-1.0, 2.0));
        let mut ops = OpCount::new();
        assert!((subtract_known(a + b, &[(512, b)], 0, 1024, &mut ops) - a).norm() < 1e-15);
        assert_eq!((ops.complex_mults, ops.complex_adds), (1, 1));
    }

    #[test]
    fn leaf_skewness_is_clipped_at_zero() {
        let spectra = vec![vec![C64::new(1.0, 0.0); 16]];
        let (case, sys) = assemble_node_system(
            &node(4, 8, vec![40, 56]),
            true,
            [None, None],
            1,
            &stage(&spectra, 0),
            |_| None,
            &mut OpCount::new(),
        );
        assert_eq!(case, AssemblyCase::Leaf);
        assert_eq!(sys.skewness().unwrap(), 1);

        let spectra = vec![vec![C64::new(1.0, 0.0); 16]; 3];
        let (_, sys) = assemble_node_system(
            &node(4, 8, vec![40, 56]),
            true,
            [None, None],
            3,
            &stage(&spectra, 0),
            |_| None,
            &mut OpCount::new(),
        );
        assert_eq!(sys.skewness().unwrap(), 0);
        assert_eq!(sys.shifts_used, vec![0, 1]);
    }

    #[test]
    fn null_system_has_no_skewness() {
        assert!(matches!(NodeSystem::null().skewness(), Err(Error::NullSystem)));
    }

    #[test]
    fn resolved_children_give_a_null_system() {
        let mut done = NodeSystem::empty(vec![1]);
        done.status = NodeStatus::Resolved;
        let spectra = vec![vec![C64::new(0.0, 0.0); 8]];
        let (case, sys) = assemble_node_system(
            &node(2, 1, vec![1, 5]),
            false,
            [Some(&done), Some(&done)],
            1,
            &stage(&spectra, 1),
            |_| Some(C64::new(1.0, 0.0)),
            &mut OpCount::new(),
        );
        assert_eq!(case, AssemblyCase::Null);
        assert_eq!(sys.status, NodeStatus::NullSystem);
    }

    #[test]
    fn merge_of_two_skewed_children() {
        let spectra0 = vec![vec![C64::new(1.0, 0.0); 16]];
        let leaf = |r, label| {
            assemble_node_system(
                &node(4, r, label),
                true,
                [None, None],
                1,
                &stage(&spectra0, 0),
                |_| None,
                &mut OpCount::new(),
            )
            .1
        };
        let odd = leaf(8, vec![40, 56]);
        let even = leaf(0, vec![32, 48]);
        let spectra1 = vec![vec![C64::new(1.0, 0.0); 8]];
        let (case, sys) = assemble_node_system(
            &node(3, 0, vec![32, 40, 48, 56]),
            false,
            [Some(&odd), Some(&even)],
            1,
            &stage(&spectra1, 1),
            |_| None,
            &mut OpCount::new(),
        );
        assert_eq!(case, AssemblyCase::Merge);
        assert_eq!(sys.unknowns, vec![40, 56, 32, 48]);
        assert_eq!(sys.shifts_used, vec![0, 0, 1]);
        // max(1 + 1 - 1, 0)
        assert_eq!(sys.skewness().unwrap(), 1);
        assert_eq!(sys.matrix[(0, 2)], C64::new(0.0, 0.0));
        assert_eq!(sys.matrix[(1, 0)], C64::new(0.0, 0.0));
    }
}
