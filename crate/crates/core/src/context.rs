use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bench::noise::NoiseInjector;
use crate::linalg::{self, DenseMatrix, LinalgError};
use crate::ops::OpCount;
use crate::C64;

/// Per-run mutable state: the operation counter, optional noise injected
/// into every block right-hand side, and optional condition-number tracking.
///
/// Each concurrent run owns its own context.
#[derive(Debug)]
pub struct RunContext {
    pub ops: OpCount,
    pub singular_tol: f64,
    noise: Option<NoiseInjector>,
    cond_rng: Option<ChaCha8Rng>,
}

impl Default for RunContext {
    fn default() -> Self {
        Self::new()
    }
}

/// Outcome of one block solve.
#[derive(Debug)]
pub(crate) struct BlockSolve {
    pub x: Vec<C64>,
    pub cond: Option<f64>,
}

impl RunContext {
    pub fn new() -> Self {
        Self {
            ops: OpCount::new(),
            singular_tol: linalg::SINGULAR_TOL,
            noise: None,
            cond_rng: None,
        }
    }

    pub fn with_noise(mut self, noise: NoiseInjector) -> Self {
        self.noise = Some(noise);
        self
    }

    /// Estimate the 2-norm condition number of every solved block. The
    /// estimates are not charged to the operation counter.
    pub fn with_condition_numbers(mut self, seed: u64) -> Self {
        self.cond_rng = Some(ChaCha8Rng::seed_from_u64(seed));
        self
    }

    pub fn with_singular_tol(mut self, tol: f64) -> Self {
        self.singular_tol = tol;
        self
    }

    pub fn measures_condition(&self) -> bool {
        self.cond_rng.is_some()
    }

    /// Perturb `rhs`, factor and solve a square block. On a singular block the
    /// condition estimate (if tracked) is reported as infinite through the
    /// error path by the caller.
    pub(crate) fn solve_block(&mut self, a: &DenseMatrix, mut rhs: Vec<C64>) -> Result<BlockSolve, LinalgError> {
        if let Some(noise) = self.noise.as_mut() {
            noise.perturb(&mut rhs);
        }
        self.ops.model_solve(a.rows());
        let lu = linalg::lu_factor(a, self.singular_tol, &mut self.ops)?;
        let x = lu.solve(&rhs, &mut self.ops);
        let cond = self.cond_rng.as_mut().map(|rng| linalg::cond2_with_lu(a, &lu, rng));
        Ok(BlockSolve { x, cond })
    }
}
