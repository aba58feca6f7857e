use serde::{Deserialize, Serialize};

use crate::ops::OpCount;
use crate::progressive::MergingCensus;
use crate::SparseSpectrum;

/// Diagnostics of one algorithm run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    /// Starting (or only) tree level; `None` for the submatrix method.
    pub r: Option<u32>,
    /// Sizes of the square systems that were solved, in solve order.
    pub block_sizes: Vec<usize>,
    pub ops_actual: u64,
    pub ops_paper_model: u64,
    /// Per-block 2-norm condition numbers, aligned with `block_sizes` when
    /// tracked. A singular block is reported as infinity (`null` in JSON).
    pub cond_blocks: Vec<f64>,
    pub success: bool,
    /// Size of every FFT computed, in order.
    pub fft_sizes: Vec<usize>,
    pub ops: OpCount,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    /// Merging-tree summary of a progressive run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merging: Option<MergingCensus>,
}

impl RunReport {
    pub(crate) fn new(algorithm: &str, r: Option<u32>) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            r,
            ..Self::default()
        }
    }

    pub(crate) fn finish(&mut self, ops: &OpCount) {
        self.ops = *ops;
        self.ops_actual = ops.total();
        self.ops_paper_model = ops.paper_model_total;
    }

    /// Mean block size over blocks.
    pub fn mean_block(&self) -> f64 {
        if self.block_sizes.is_empty() {
            return 0.0;
        }
        self.block_sizes.iter().sum::<usize>() as f64 / self.block_sizes.len() as f64
    }

    /// Mean block size seen by a random unknown: `sum m^2 / sum m`.
    pub fn unknown_weighted_mean_block(&self) -> f64 {
        let total: usize = self.block_sizes.iter().sum();
        if total == 0 {
            return 0.0;
        }
        self.block_sizes.iter().map(|m| m * m).sum::<usize>() as f64 / total as f64
    }

    pub fn max_block(&self) -> usize {
        self.block_sizes.iter().copied().max().unwrap_or(0)
    }

    /// Mean of `log10` of the tracked condition numbers, `None` when none were
    /// tracked.
    pub fn mean_log10_cond(&self) -> Option<f64> {
        if self.cond_blocks.is_empty() {
            return None;
        }
        Some(self.cond_blocks.iter().map(|c| c.log10()).sum::<f64>() / self.cond_blocks.len() as f64)
    }
}

/// Successful recovery: the coefficients on the support plus diagnostics.
#[derive(Clone, Debug)]
pub struct Recovery {
    pub spectrum: SparseSpectrum,
    pub report: RunReport,
}
