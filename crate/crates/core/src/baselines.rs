//! Reference algorithms: the direct submatrix solve and shift-and-sample.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::{DenseMatrix, LinalgError};
use crate::signal::{aliased_spectrum, unit_root};
use crate::tree::{build_tree, NodeKey};
use crate::{Error, Recovery, Result, RunContext, RunReport, Signal, SparseSpectrum, SupportSet, C64};

/// How the tree level for shift-and-sample is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelChoice {
    Explicit(u32),
    /// `ceil(log k - log log k)`: `O(k log k)` work, blocks of size `~log k`.
    OptimalComplexity,
    /// `ceil(log k)`: blocks of expected size at most 1, `O(k log^2 k)` work.
    Stable,
}

impl fmt::Display for LevelChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelChoice::Explicit(r) => write!(f, "{r}"),
            LevelChoice::OptimalComplexity => f.write_str("auto-optimal"),
            LevelChoice::Stable => f.write_str("auto-stable"),
        }
    }
}

impl FromStr for LevelChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto-optimal" => Ok(LevelChoice::OptimalComplexity),
            "auto-stable" => Ok(LevelChoice::Stable),
            other => other
                .parse()
                .map(LevelChoice::Explicit)
                .map_err(|_| Error::invalid(format!("unknown level `{other}`"))),
        }
    }
}

/// `ceil(log2 k)` for `k >= 1`.
pub fn ceil_log2(k: usize) -> u32 {
    k.max(1).next_power_of_two().trailing_zeros()
}

/// Resolve a level choice for a support of (expected) size `k`.
pub fn resolve_level(choice: LevelChoice, k: usize) -> u32 {
    let stable = ceil_log2(k);
    let r = match choice {
        LevelChoice::Explicit(r) => r,
        LevelChoice::Stable => stable,
        LevelChoice::OptimalComplexity if k <= 2 => stable,
        LevelChoice::OptimalComplexity => {
            let log_k = (k as f64).log2();
            let r = (log_k - log_k.log2()).ceil();
            // guard against log2 rounding just above an integer
            let r = if (r - 1.0 - (log_k - log_k.log2())).abs() < 1e-12 {
                r - 1.0
            } else {
                r
            };
            r.max(0.0) as u32
        }
    };
    match choice {
        LevelChoice::OptimalComplexity => {
            log::debug!("level r = {r} for k = {k}: (log k, k log k) regime")
        }
        LevelChoice::Stable => log::debug!("level r = {r} for k = {k}: (1, k log^2 k) regime"),
        LevelChoice::Explicit(_) => {}
    }
    r
}

/// Solve the `k x k` system built from the first `k` time samples.
///
/// Row `m` reads `N f(m) = sum_j e^{+2 pi i m j / N} F f(j)`; the factor `N`
/// keeps the right-hand side on the scale of the coefficients.
pub fn submatrix_method(f: &Signal, support: &SupportSet, ctx: &mut RunContext) -> Result<Recovery> {
    check_lengths(f, support)?;
    let n = support.n();
    let k = support.len();
    let mut report = RunReport::new("submatrix", None);

    let a = DenseMatrix::from_fn(k, k, |m, c| {
        let e = ((m as u128 * support.indices()[c] as u128) % n as u128) as f64;
        C64::from_polar(1.0, 2.0 * PI * e / n as f64)
    });
    let scale = n as f64;
    let rhs: Vec<C64> = f.samples()[..k].iter().map(|v| v * scale).collect();
    ctx.ops.mul(k as u64);

    let solved = ctx.solve_block(&a, rhs);
    report.block_sizes.push(k);
    let solved = match solved {
        Ok(s) => s,
        Err(e) => {
            if ctx.measures_condition() {
                report.cond_blocks.push(f64::INFINITY);
            }
            return Err(block_error(e, None));
        }
    };
    report.cond_blocks.extend(solved.cond);
    report.success = true;
    report.finish(&ctx.ops);
    Ok(Recovery {
        spectrum: SparseSpectrum::new(support.clone(), solved.x)?,
        report,
    })
}

/// Shift-and-sample at the resolved level `r`: `mu*_r` aliased `2^r`-point
/// DFTs, then one Vandermonde solve per level-`r` node.
pub fn shift_and_sample(
    f: &Signal,
    support: &SupportSet,
    level: LevelChoice,
    ctx: &mut RunContext,
) -> Result<Recovery> {
    check_lengths(f, support)?;
    let n = support.n();
    let r = resolve_level(level, support.len());
    let tree = build_tree(support, r)?;
    let mu_star = tree.mu_star(r);
    let mut report = RunReport::new("shift-sample", Some(r));

    let spectra = (0..mu_star as u64)
        .map(|t| aliased_spectrum(f, r, t, &mut ctx.ops))
        .collect::<Result<Vec<_>>>()?;
    report.fft_sizes = vec![1 << r; mu_star];

    let mut coeffs: Vec<(usize, C64)> = Vec::with_capacity(support.len());
    for &id in tree.nodes_at_level(r) {
        let node = tree.node(id);
        let m = node.mu();
        let a = DenseMatrix::from_fn(m, m, |t, c| unit_root(t as u64, node.label[c], n));
        let rhs: Vec<C64> = spectra[..m].iter().map(|s| s[node.residue()]).collect();
        report.block_sizes.push(m);
        match ctx.solve_block(&a, rhs) {
            Ok(solved) => {
                report.cond_blocks.extend(solved.cond);
                coeffs.extend(node.label.iter().copied().zip(solved.x));
            }
            Err(e) => {
                if ctx.measures_condition() {
                    report.cond_blocks.push(f64::INFINITY);
                }
                return Err(block_error(e, Some(node.key)));
            }
        }
    }
    report.success = true;
    report.finish(&ctx.ops);
    Ok(Recovery {
        spectrum: SparseSpectrum::from_pairs(support, coeffs)?,
        report,
    })
}

pub(crate) fn check_lengths(f: &Signal, support: &SupportSet) -> Result<()> {
    if f.len() != support.n() {
        return Err(Error::invalid(format!(
            "signal has length {} but the support lives in Z_{}",
            f.len(),
            support.n()
        )));
    }
    Ok(())
}

pub(crate) fn block_error(e: LinalgError, node: Option<NodeKey>) -> Error {
    match e {
        LinalgError::Singular { .. } => Error::Singular { node },
        LinalgError::Dimension(msg) => Error::invalid(msg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{random_coefficients, synthesize_signal};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(indices: Vec<usize>, n: usize, seed: u64) -> (SupportSet, SparseSpectrum, Signal) {
        let support = SupportSet::new(indices, n).unwrap();
        let coeffs = random_coefficients(&support, &mut ChaCha8Rng::seed_from_u64(seed));
        let f = synthesize_signal(&coeffs);
        (support, coeffs, f)
    }

    #[test]
    fn resolve_level_examples() {
        assert_eq!(resolve_level(LevelChoice::Stable, 256), 8);
        assert_eq!(resolve_level(LevelChoice::OptimalComplexity, 256), 5);
        assert_eq!(resolve_level(LevelChoice::Stable, 2), 1);
        assert_eq!(resolve_level(LevelChoice::OptimalComplexity, 2), 1);
        assert_eq!(resolve_level(LevelChoice::OptimalComplexity, 1), 0);
        assert_eq!(resolve_level(LevelChoice::OptimalComplexity, 16), 2);
        assert_eq!(resolve_level(LevelChoice::OptimalComplexity, 8), 2);
        assert_eq!(resolve_level(LevelChoice::Stable, 100), 7);
        assert_eq!(resolve_level(LevelChoice::Explicit(3), 100), 3);
    }

    #[test]
    fn level_choice_parsing() {
        assert_eq!("auto-stable".parse::<LevelChoice>().unwrap(), LevelChoice::Stable);
        assert_eq!(
            "auto-optimal".parse::<LevelChoice>().unwrap(),
            LevelChoice::OptimalComplexity
        );
        assert_eq!("4".parse::<LevelChoice>().unwrap(), LevelChoice::Explicit(4));
        assert!("deep".parse::<LevelChoice>().is_err());
    }

    #[test]
    fn submatrix_single_frequency() {
        let (support, coeffs, f) = setup(vec![37], 64, 1);
        let rec = submatrix_method(&f, &support, &mut RunContext::new()).unwrap();
        assert!((rec.spectrum.coeffs()[0] - f.samples()[0] * 64.0).norm() < 1e-12);
        assert!(rec.spectrum.relative_error(&coeffs).unwrap() < 1e-12);
        assert_eq!(rec.report.block_sizes, vec![1]);
    }

    #[test]
    fn submatrix_full_support_is_the_dft() {
        let (support, _, f) = setup((0..8).collect(), 8, 2);
        let rec = submatrix_method(&f, &support, &mut RunContext::new()).unwrap();
        let full = f.spectrum();
        for (a, b) in rec.spectrum.coeffs().iter().zip(&full) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn worked_example_costs_44() {
        let (support, coeffs, f) = setup(vec![0, 1, 6, 7, 38, 65, 135, 512], 1024, 7);
        let rec = shift_and_sample(&f, &support, LevelChoice::Explicit(2), &mut RunContext::new()).unwrap();
        assert_eq!(rec.report.ops_paper_model, 44);
        assert_eq!(rec.report.fft_sizes, vec![4, 4]);
        assert_eq!(rec.report.block_sizes, vec![2, 2, 2, 2]);
        assert!(rec.spectrum.relative_error(&coeffs).unwrap() < 1e-12);
    }

    #[test]
    fn level_zero_is_one_big_system() {
        let (support, coeffs, f) = setup(vec![3, 17, 40, 41, 99], 128, 9);
        let rec = shift_and_sample(&f, &support, LevelChoice::Explicit(0), &mut RunContext::new()).unwrap();
        assert_eq!(rec.report.block_sizes, vec![5]);
        assert_eq!(rec.report.fft_sizes, vec![1; 5]);
        assert!(rec.spectrum.relative_error(&coeffs).unwrap() < 1e-10);
    }

    #[test]
    fn level_beyond_log_n_is_rejected() {
        let (support, _, f) = setup(vec![1, 2], 8, 3);
        assert!(shift_and_sample(&f, &support, LevelChoice::Explicit(4), &mut RunContext::new()).is_err());
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let (support, _, _) = setup(vec![1, 2], 8, 3);
        let f = Signal::new(vec![C64::new(0.0, 0.0); 16]).unwrap();
        assert!(submatrix_method(&f, &support, &mut RunContext::new()).is_err());
    }

    #[test]
    fn condition_numbers_are_tracked_per_block() {
        let (support, _, f) = setup(vec![0, 1, 6, 7, 38, 65, 135, 512], 1024, 4);
        let mut ctx = RunContext::new().with_condition_numbers(1);
        let rec = shift_and_sample(&f, &support, LevelChoice::Explicit(2), &mut ctx).unwrap();
        assert_eq!(rec.report.cond_blocks.len(), 4);
        // {0, 512} at shifts 0, 1 is [[1, 1], [1, -1]], a scaled unitary
        let pos = 3; // residue 0 is the rightmost level-2 node
        assert!((rec.report.cond_blocks[pos] - 1.0).abs() < 1e-6);
    }
}
