//! Shift and progressive sample.
//!
//! Starting at level `r` of the congruence tree, each stage takes `eta` new
//! shifted, downsampled DFTs at the current level and walks the nodes of that
//! level. A node inherits the open systems of its children, appends up to
//! `eta` new equations and is solved as soon as its system is square. The run
//! stops once every coefficient is known or after the root stage.
//!
//! ```
//! use sdft::progressive::{progressive_sdft, ProgressiveConfig};
//! use sdft::signal::{random_coefficients, synthesize_signal};
//! use sdft::{RunContext, SupportSet};
//! use rand::SeedableRng;
//!
//! let support = SupportSet::new(vec![1, 3, 4, 5, 6, 7, 19, 21, 23, 32, 40, 48, 56, 70, 82], 1024)?;
//! let coeffs = random_coefficients(&support, &mut rand_chacha::ChaCha8Rng::seed_from_u64(5));
//! let f = synthesize_signal(&coeffs);
//! let cfg = ProgressiveConfig { start_level: Some(4), ..Default::default() };
//! let rec = progressive_sdft(&f, &support, &cfg, &mut RunContext::new())?;
//! assert!(rec.spectrum.relative_error(&coeffs)? < 1e-10);
//! # Ok::<(), sdft::Error>(())
//! ```

mod merging;
mod system;
mod trace;

pub use merging::{extract_merging_trees, node_count_bound, MergingCensus, MergingTree};
pub use system::{assemble_node_system, subtract_known, AssemblyCase, NodeStatus, NodeSystem, StageValues};
pub use trace::{NodeTrace, SolveOutcome, StageTrace, Trace};

use serde::{Deserialize, Serialize};

use crate::baselines::{block_error, ceil_log2, check_lengths};
use crate::signal::aliased_spectrum;
use crate::tree::{build_tree, CongruenceTree};
use crate::{linalg, Error, Recovery, Result, RunContext, RunReport, Signal, SparseSpectrum, SupportSet, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgressiveConfig {
    /// New measurements per stage. Values of 5 or more make failures rare.
    pub eta: usize,
    /// Starting level; `ceil(log2 |J|)` when unset.
    pub start_level: Option<u32>,
    pub singular_tol: f64,
    /// Keep the execution trace in the result.
    pub trace: bool,
    /// Check the unused equations of null nodes against the known values.
    pub check_redundant: bool,
}

impl Default for ProgressiveConfig {
    fn default() -> Self {
        Self {
            eta: 1,
            start_level: None,
            singular_tol: linalg::SINGULAR_TOL,
            trace: false,
            check_redundant: false,
        }
    }
}

/// Everything a run produced, successful or not.
#[derive(Debug)]
pub struct Execution {
    /// Recovered coefficients aligned with the support; `None` where unknown.
    pub coefficients: Vec<Option<C64>>,
    pub report: RunReport,
    pub trace: Option<Trace>,
    pub merging_trees: Vec<MergingTree>,
    pub failure: Option<Error>,
    pub tree: CongruenceTree,
}

impl Execution {
    pub fn is_success(&self) -> bool {
        self.failure.is_none()
    }
}

/// Run the algorithm and return the coefficients, or the failure.
pub fn progressive_sdft(
    f: &Signal,
    support: &SupportSet,
    cfg: &ProgressiveConfig,
    ctx: &mut RunContext,
) -> Result<Recovery> {
    let exec = execute(f, support, cfg, ctx)?;
    if let Some(e) = exec.failure {
        return Err(e);
    }
    let coeffs = exec
        .coefficients
        .into_iter()
        .map(|c| c.expect("a successful run knows every coefficient"))
        .collect();
    Ok(Recovery {
        spectrum: SparseSpectrum::new(support.clone(), coeffs)?,
        report: exec.report,
    })
}

/// Run the algorithm. Only malformed input is an `Err`; algorithm failures
/// are returned in [`Execution::failure`].
pub fn execute(f: &Signal, support: &SupportSet, cfg: &ProgressiveConfig, ctx: &mut RunContext) -> Result<Execution> {
    check_lengths(f, support)?;
    if cfg.eta == 0 {
        return Err(Error::invalid("eta must be at least 1"));
    }
    let m = support.m_log2();
    let r = cfg.start_level.unwrap_or_else(|| ceil_log2(support.len()).min(m));
    if r > m {
        return Err(Error::invalid(format!("start level {r} exceeds log2 N = {m}")));
    }
    let tree = build_tree(support, r)?;
    let n = support.n();
    let k = support.len();
    let eta = cfg.eta;
    let saved_tol = ctx.singular_tol;
    ctx.singular_tol = cfg.singular_tol;

    let mut report = RunReport::new("progressive", Some(r));
    let mut trace = Trace {
        n,
        eta,
        r,
        stages: Vec::new(),
        failure: None,
    };
    let mut coefficients: Vec<Option<C64>> = vec![None; k];
    let mut known_count = 0;
    let mut systems: Vec<Option<NodeSystem>> = vec![None; tree.len()];
    let mut failure = None;

    'stages: for stage in 0..=r {
        let level = r - stage;
        let first_shift = eta as u64 * stage as u64;
        let spectra = (0..eta as u64)
            .map(|i| aliased_spectrum(f, level, first_shift + i, &mut ctx.ops))
            .collect::<Result<Vec<_>>>()?;
        let size = 1usize << level;
        report.fft_sizes.extend(std::iter::repeat_n(size, eta));
        let values = StageValues {
            n,
            first_shift,
            spectra: &spectra,
        };
        let mut stage_trace = StageTrace {
            stage,
            level,
            fft_size: size,
            shifts: (first_shift..first_shift + eta as u64).collect(),
            nodes: Vec::new(),
        };

        for &id in tree.nodes_at_level(level) {
            let node = tree.node(id);
            let known = |j: usize| support.position(j).and_then(|p| coefficients[p]);
            let children = [
                node.odd.and_then(|c| systems[c].as_ref()),
                node.even.and_then(|c| systems[c].as_ref()),
            ];
            let inherited = children
                .iter()
                .flatten()
                .filter(|c| c.is_unresolved())
                .map(|c| c.cols() - c.rows())
                .sum::<usize>();
            let (case, mut system) =
                assemble_node_system(node, level == r, children, eta, &values, known, &mut ctx.ops);

            let mut nt = NodeTrace {
                level,
                residue: node.residue(),
                label: node.label.clone(),
                case,
                skew_before: None,
                skew_after: None,
                rows: system.rows(),
                cols: system.cols(),
                rows_added: 0,
                status: system.status,
                unknowns: system.unknowns.clone(),
                shifts: system.shifts_used.clone(),
                solve: None,
                cond: None,
                redundant_residual: None,
            };

            if case == AssemblyCase::Null {
                if cfg.check_redundant {
                    let known = |j: usize| support.position(j).and_then(|p| coefficients[p]);
                    nt.redundant_residual = Some(system::redundant_residual(node, eta, &values, known));
                }
            } else {
                let before = if case == AssemblyCase::Leaf {
                    node.mu()
                } else {
                    inherited
                };
                let after = system.skewness()?;
                nt.skew_before = Some(before);
                nt.skew_after = Some(after);
                nt.rows_added = before - after;
                if after == 0 {
                    report.block_sizes.push(system.cols());
                    match ctx.solve_block(&system.matrix, system.rhs.clone()) {
                        Ok(solved) => {
                            nt.solve = Some(SolveOutcome::Solved);
                            nt.cond = solved.cond;
                            report.cond_blocks.extend(solved.cond);
                            for (&j, &c) in system.unknowns.iter().zip(&solved.x) {
                                let p = support.position(j).expect("unknowns lie in the support");
                                coefficients[p] = Some(c);
                            }
                            known_count += system.unknowns.len();
                            system.status = NodeStatus::Resolved;
                            nt.status = NodeStatus::Resolved;
                        }
                        Err(e) => {
                            nt.solve = Some(SolveOutcome::Singular);
                            if ctx.measures_condition() {
                                report.cond_blocks.push(f64::INFINITY);
                            }
                            failure = Some(block_error(e, Some(node.key)));
                        }
                    }
                }
            }
            stage_trace.nodes.push(nt);
            systems[id] = Some(system);
            if failure.is_some() {
                trace.stages.push(stage_trace);
                break 'stages;
            }
        }
        trace.stages.push(stage_trace);
        // children systems are no longer needed
        if level < r {
            for &id in tree.nodes_at_level(level + 1) {
                systems[id] = None;
            }
        }
        if known_count == k {
            break;
        }
    }
    ctx.singular_tol = saved_tol;

    if failure.is_none() && known_count < k {
        failure = Some(Error::Underdetermined {
            unresolved: k - known_count,
        });
    }
    let merging_trees = extract_merging_trees(&trace);
    report.success = failure.is_none();
    report.failure = failure.as_ref().map(ToString::to_string);
    report.merging = Some(MergingCensus::from_trees(&merging_trees));
    report.finish(&ctx.ops);
    trace.failure = report.failure.clone();
    if let Some(e) = &failure {
        log::debug!("progressive run failed: {e}");
    }

    Ok(Execution {
        coefficients,
        report,
        trace: cfg.trace.then_some(trace),
        merging_trees,
        failure,
        tree,
    })
}
