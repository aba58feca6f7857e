//! Monte-Carlo check of the structural invariants of the progressive
//! algorithm, plus empirical failure rates next to their theoretical bounds.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sampling::sample_support;
use crate::baselines::ceil_log2;
use crate::progressive::{execute, node_count_bound, AssemblyCase, MergingTree, NodeStatus, ProgressiveConfig, Trace};
use crate::signal::{random_coefficients, synthesize_signal};
use crate::tree::NodeKey;
use crate::{parallel, Error, Result, RunContext};

/// Names of the hard invariants.
pub const SKEWNESS_RECURSION: &str = "skewness-recursion";
pub const COLUMN_COUNT: &str = "column-count";
pub const ROW_COUNT: &str = "row-count";
pub const LEAF_BOUNDS: &str = "leaf-bounds";
pub const NODE_COUNT: &str = "node-count";
const INVARIANTS: [&str; 5] = [SKEWNESS_RECURSION, COLUMN_COUNT, ROW_COUNT, LEAF_BOUNDS, NODE_COUNT];

/// Counterexamples kept in full per report.
const MAX_COUNTEREXAMPLES: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub trials: usize,
    pub n: usize,
    pub k: usize,
    pub eta: usize,
    pub seed: u64,
    /// Starting level; `ceil(log2 k)` when unset.
    pub start_level: Option<u32>,
}

impl VerifyConfig {
    pub fn new(trials: usize, n: usize, k: usize, eta: usize, seed: u64) -> Self {
        Self {
            trials,
            n,
            k,
            eta,
            seed,
            start_level: None,
        }
    }
}

/// A proportion with its 95% Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub count: usize,
    pub trials: usize,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Rate {
    pub fn new(count: usize, trials: usize) -> Self {
        let (ci_low, ci_high) = wilson_interval(count, trials, 1.959_963_984_540_054);
        Self {
            count,
            trials,
            rate: if trials == 0 { 0.0 } else { count as f64 / trials as f64 },
            ci_low,
            ci_high,
        }
    }
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Upper bound `e^{eta/3} / k^{eta/3}` on the probability that the root stays
/// unresolved.
pub fn unresolved_root_bound(eta: usize, k: usize) -> f64 {
    let e = eta as f64 / 3.0;
    (e - e * (k as f64).ln()).exp()
}

/// Reference value `8 eta^2 k log2^2 k / N` for the probability that some
/// merging matrix is singular.
pub fn singular_bound(eta: usize, k: usize, n: usize) -> f64 {
    let lk = (k as f64).log2();
    8.0 * (eta * eta) as f64 * k as f64 * lk * lk / n as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub invariant: String,
    pub checked: u64,
    pub violations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub invariant: String,
    pub trial: usize,
    pub detail: String,
    pub trace: Trace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub config: VerifyConfig,
    pub r: u32,
    pub failures: Rate,
    pub unresolved_root: Rate,
    pub unresolved_root_bound: f64,
    pub singular: Rate,
    pub singular_bound: f64,
    pub merging_trees: u64,
    pub complete_nontrivial_trees: u64,
    pub checks: Vec<InvariantCheck>,
    pub counterexamples: Vec<Counterexample>,
}

impl VerificationReport {
    pub fn violations(&self) -> u64 {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    pub fn check(&self, invariant: &str) -> Option<&InvariantCheck> {
        self.checks.iter().find(|c| c.invariant == invariant)
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let c = &self.config;
        let mut s = format!(
            "progressive invariants: {} trials, N = {}, k = {}, eta = {}, r = {}\n",
            c.trials, c.n, c.k, c.eta, self.r
        );
        for ch in &self.checks {
            let tag = if ch.violations == 0 { "ok  " } else { "FAIL" };
            s += &format!(
                "  [{tag}] {:<20} {} checked, {} violations\n",
                ch.invariant, ch.checked, ch.violations
            );
        }
        let rate = |name: &str, r: &Rate| {
            format!(
                "  {name:<22} {:.4}% ({} / {}), 95% CI [{:.4}%, {:.4}%]\n",
                100.0 * r.rate,
                r.count,
                r.trials,
                100.0 * r.ci_low,
                100.0 * r.ci_high
            )
        };
        s += &rate("failure rate", &self.failures);
        s += &rate("unresolved root rate", &self.unresolved_root);
        s += &format!(
            "  {:<22} {:.4}%\n",
            "  bound e^(eta/3)/k^(eta/3)",
            100.0 * self.unresolved_root_bound
        );
        s += &rate("singular matrix rate", &self.singular);
        s += &format!(
            "  {:<22} {:.4}%\n",
            "  bound 8 eta^2 k log^2 k / N",
            100.0 * self.singular_bound
        );
        s += &format!(
            "  merging trees: {} ({} complete with height > 0)\n",
            self.merging_trees, self.complete_nontrivial_trees
        );
        s
    }
}

#[derive(Default)]
struct TrialCheck {
    success: bool,
    underdetermined: bool,
    singular: bool,
    trees: u64,
    complete_nontrivial: u64,
    checked: [u64; 5],
    violations: Vec<(usize, String)>,
    trace: Option<Trace>,
}

impl TrialCheck {
    fn check(&mut self, which: usize, ok: bool, detail: impl FnOnce() -> String) {
        self.checked[which] += 1;
        if !ok {
            self.violations.push((which, detail()));
        }
    }
}

/// Run `cfg.trials` progressive runs on fresh random supports and check every
/// node and merging tree.
pub fn verify_lemmas(cfg: &VerifyConfig) -> Result<VerificationReport> {
    if cfg.trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    if cfg.eta == 0 {
        return Err(Error::invalid("eta must be at least 1"));
    }
    if !cfg.n.is_power_of_two() || cfg.k == 0 || cfg.k > cfg.n {
        return Err(Error::invalid(format!(
            "need N a power of two and 0 < k <= N, got N = {}, k = {}",
            cfg.n, cfg.k
        )));
    }
    let m = cfg.n.trailing_zeros();
    let r = cfg.start_level.unwrap_or_else(|| ceil_log2(cfg.k).min(m));
    if r > m {
        return Err(Error::invalid(format!("start level {r} exceeds log2 N = {m}")));
    }

    let results: Vec<Result<TrialCheck>> = parallel::map_trials(cfg.trials, |trial| check_trial(cfg, r, trial));

    let mut failures = 0;
    let mut underdetermined = 0;
    let mut singular = 0;
    let mut merging_trees = 0;
    let mut complete_nontrivial = 0;
    let mut checks: Vec<InvariantCheck> = INVARIANTS
        .iter()
        .map(|name| InvariantCheck {
            invariant: name.to_string(),
            checked: 0,
            violations: 0,
        })
        .collect();
    let mut counterexamples = Vec::new();
    for (trial, res) in results.into_iter().enumerate() {
        let tc = res?;
        failures += usize::from(!tc.success);
        underdetermined += usize::from(tc.underdetermined);
        singular += usize::from(tc.singular);
        merging_trees += tc.trees;
        complete_nontrivial += tc.complete_nontrivial;
        for (c, n) in checks.iter_mut().zip(tc.checked) {
            c.checked += n;
        }
        for (which, detail) in tc.violations {
            checks[which].violations += 1;
            if counterexamples.len() < MAX_COUNTEREXAMPLES {
                counterexamples.push(Counterexample {
                    invariant: INVARIANTS[which].to_string(),
                    trial,
                    detail,
                    trace: tc.trace.clone().expect("violating trials keep their trace"),
                });
            }
        }
    }

    Ok(VerificationReport {
        config: cfg.clone(),
        r,
        failures: Rate::new(failures, cfg.trials),
        unresolved_root: Rate::new(underdetermined, cfg.trials),
        unresolved_root_bound: unresolved_root_bound(cfg.eta, cfg.k),
        singular: Rate::new(singular, cfg.trials),
        singular_bound: singular_bound(cfg.eta, cfg.k, cfg.n),
        merging_trees,
        complete_nontrivial_trees: complete_nontrivial,
        checks,
        counterexamples,
    })
}

fn check_trial(cfg: &VerifyConfig, r: u32, trial: usize) -> Result<TrialCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64);
    let support = sample_support(cfg.n, cfg.k, &mut rng)?;
    let f = synthesize_signal(&random_coefficients(&support, &mut rng));
    let pcfg = ProgressiveConfig {
        eta: cfg.eta,
        start_level: Some(r),
        trace: true,
        ..Default::default()
    };
    let exec = execute(&f, &support, &pcfg, &mut RunContext::new())?;
    let trace = exec.trace.expect("trace requested");

    let mut tc = TrialCheck {
        success: exec.failure.is_none(),
        underdetermined: matches!(exec.failure, Some(Error::Underdetermined { .. })),
        singular: matches!(exec.failure, Some(Error::Singular { .. })),
        ..Default::default()
    };
    check_skewness(&trace, &mut tc);
    for t in &exec.merging_trees {
        check_tree(t, cfg.eta, r, &mut tc);
    }
    if !tc.violations.is_empty() {
        tc.trace = Some(trace);
    }
    Ok(tc)
}

fn check_skewness(trace: &Trace, tc: &mut TrialCheck) {
    let skew: HashMap<NodeKey, Option<usize>> = trace
        .nodes()
        .map(|n| {
            let open = n.status == NodeStatus::Unresolved && n.solve.is_none();
            (n.key(), if open { n.skew_after } else { None })
        })
        .collect();
    let eta = trace.eta;
    for node in trace.nodes() {
        if node.case == AssemblyCase::Null {
            continue;
        }
        let expected = if node.case == AssemblyCase::Leaf {
            node.mu().saturating_sub(eta)
        } else {
            let key = node.key();
            let s: usize = [key.odd_child(), key.even_child()]
                .iter()
                .filter_map(|c| skew.get(c).copied().flatten())
                .sum();
            s.saturating_sub(eta)
        };
        let got = node.skew_after;
        tc.check(0, got == Some(expected), || {
            format!("{}: skewness {got:?}, recursion gives {expected}", node.key())
        });
    }
}

fn check_tree(t: &MergingTree, eta: usize, r: u32, tc: &mut TrialCheck) {
    tc.trees += 1;
    let w = t.weight;
    tc.check(1, t.cols == w, || {
        format!("tree at {}: {} columns, weight {w}", t.root, t.cols)
    });
    let rows = (eta * t.node_count()).min(w);
    tc.check(2, t.rows == rows, || {
        format!(
            "tree at {}: {} rows, expected min({eta} * {}, {w}) = {rows}",
            t.root,
            t.rows,
            t.node_count()
        )
    });
    let bound = node_count_bound(t.leaves.len(), t.height);
    tc.check(4, t.node_count() as f64 >= bound - 1e-9, || {
        format!("tree at {}: {} nodes below bound {bound:.3}", t.root, t.node_count())
    });
    if t.complete && t.height > 0 {
        tc.complete_nontrivial += 1;
        let max_skew = eta * r as usize;
        for ((leaf, &mu), &s) in t.leaves.iter().zip(&t.leaf_mu).zip(&t.leaf_skew) {
            let ok = (1..=max_skew).contains(&s) && mu > eta && mu <= eta * (r as usize + 1);
            tc.check(3, ok, || {
                format!("leaf {leaf} of tree at {}: mu {mu}, skewness {s}", t.root)
            });
        }
    }
}
