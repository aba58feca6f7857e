//! Acceptance suite. Runs every criterion in order, prints one `[PASS]` or
//! `[FAIL]` line per criterion and exits nonzero if any failed.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdft::baselines::{shift_and_sample, LevelChoice};
use sdft::bench::verify::{
    unresolved_root_bound, COLUMN_COUNT, LEAF_BOUNDS, NODE_COUNT, ROW_COUNT, SKEWNESS_RECURSION,
};
use sdft::bench::{aggregate, run_trials, AggregateRow, Algorithm, TrialConfig, VerifyConfig};
use sdft::fft::{fft_pow2, Direction};
use sdft::ops::{fft_model_cost, solve_model_cost, OpCount};
use sdft::progressive::{execute, AssemblyCase, NodeStatus, ProgressiveConfig};
use sdft::signal::{aliased_spectrum, random_coefficients, shift, synthesize_signal};
use sdft::{RunContext, Signal, SupportSet, C64};

const N14: usize = 1 << 14;
const POWERS: [usize; 6] = [8, 16, 32, 64, 128, 256];

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Self {
            pass,
            summary: summary.into(),
            details: Vec::new(),
        }
    }

    fn detail(mut self, line: impl Into<String>) -> Self {
        self.details.push(line.into());
        self
    }
}

fn within(elapsed: Duration, budget: Duration) -> (bool, String) {
    (
        elapsed <= budget,
        format!("{:.2}s of {:.0}s budget", elapsed.as_secs_f64(), budget.as_secs_f64()),
    )
}

fn trials(algorithm: Algorithm, k: usize, count: usize, seed: u64, tweak: impl Fn(&mut TrialConfig)) -> AggregateRow {
    let mut cfg = TrialConfig {
        seed,
        ..TrialConfig::new(algorithm, N14, k)
    };
    tweak(&mut cfg);
    let recs = run_trials(&cfg, count).expect("trial configuration is valid");
    aggregate(&recs).expect("records present").remove(0)
}

fn worked_example_op_count() -> Outcome {
    let start = Instant::now();
    let support = SupportSet::new(vec![0, 1, 6, 7, 38, 65, 135, 512], 1024).unwrap();
    let coeffs = random_coefficients(&support, &mut ChaCha8Rng::seed_from_u64(7));
    let f = synthesize_signal(&coeffs);
    let rec = shift_and_sample(&f, &support, LevelChoice::Explicit(2), &mut RunContext::new()).unwrap();
    let ops = rec.report.ops_paper_model;
    let full = fft_model_cost(1024);
    let direct = solve_model_cost(8);
    let (fast, time) = within(start.elapsed(), Duration::from_secs(1));
    let pass = ops == 44 && full == 15360 && direct == 384 && fast;
    Outcome::new(
        pass,
        format!("worked-example op count: shift-sample {ops}, full FFT {full}, direct solve {direct}; {time}"),
    )
}

fn walkthrough_resolution_pattern() -> Outcome {
    let start = Instant::now();
    let support = SupportSet::new(vec![1, 3, 4, 5, 6, 7, 19, 21, 23, 32, 40, 48, 56, 70, 82], 1024).unwrap();
    let coeffs = random_coefficients(&support, &mut ChaCha8Rng::seed_from_u64(5));
    let f = synthesize_signal(&coeffs);
    let cfg = ProgressiveConfig {
        start_level: Some(4),
        trace: true,
        ..Default::default()
    };
    let exec = execute(&f, &support, &cfg, &mut RunContext::new()).unwrap();
    let trace = exec.trace.as_ref().unwrap();

    let labels = |stage: usize, pred: &dyn Fn(&sdft::progressive::NodeTrace) -> bool| {
        let mut v: Vec<Vec<usize>> = trace.stages[stage]
            .nodes
            .iter()
            .filter(|n| pred(n))
            .map(|n| n.label.clone())
            .collect();
        v.sort();
        v
    };
    let resolved = |n: &sdft::progressive::NodeTrace| n.status == NodeStatus::Resolved;
    let open = |n: &sdft::progressive::NodeTrace| n.status == NodeStatus::Unresolved;
    let null = |n: &sdft::progressive::NodeTrace| n.case == AssemblyCase::Null;

    let mut checks = Vec::new();
    checks.push(trace.stages.len() == 3);
    checks.push(labels(0, &resolved) == vec![vec![1], vec![4], vec![82]]);
    checks.push(
        labels(0, &open)
            == vec![
                vec![3, 19],
                vec![5, 21],
                vec![6, 70],
                vec![7, 23],
                vec![32, 48],
                vec![40, 56],
            ],
    );
    checks.push(
        trace.stages[0]
            .nodes
            .iter()
            .filter(|n| open(n))
            .all(|n| n.skew_after == Some(1)),
    );
    checks.push(labels(1, &resolved) == vec![vec![3, 19], vec![5, 21], vec![6, 70], vec![7, 23]]);
    checks.push(labels(1, &null) == vec![vec![1], vec![4], vec![82]]);
    checks.push(labels(1, &open) == vec![vec![32, 40, 48, 56]]);
    checks.push(
        trace.stages[1]
            .nodes
            .iter()
            .any(|n| n.label == [32, 40, 48, 56] && n.case == AssemblyCase::Merge && n.skew_after == Some(1)),
    );
    checks.push(labels(2, &resolved) == vec![vec![4, 32, 40, 48, 56]]);
    let merge = trace.stages[2].nodes.iter().find(|n| resolved(n));
    checks.push(merge.is_some_and(|m| {
        m.case == AssemblyCase::Propagate && m.unknowns == [40, 56, 32, 48] && m.shifts == [0, 0, 1, 2] && m.rows == 4
    }));
    checks.push(trace.stages[2].nodes.iter().filter(|n| !resolved(n)).all(null));
    checks.push(exec.failure.is_none());
    let (fast, time) = within(start.elapsed(), Duration::from_secs(1));
    let matched = checks.iter().filter(|&&c| c).count();
    Outcome::new(
        matched == checks.len() && fast,
        format!(
            "15-element walkthrough resolution pattern: {matched}/{} checks match; {time}",
            checks.len()
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let algorithms = [
        Algorithm::Submatrix,
        Algorithm::ShiftSample(LevelChoice::OptimalComplexity),
        Algorithm::ShiftSample(LevelChoice::Stable),
        Algorithm::Progressive,
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for algorithm in algorithms {
        for k in POWERS {
            if algorithm == Algorithm::Submatrix && k > 32 {
                continue;
            }
            let cfg = TrialConfig {
                seed: 300 + k as u64,
                ..TrialConfig::new(algorithm, N14, k)
            };
            let recs = run_trials(&cfg, 500).unwrap();
            let ok: Vec<f64> = recs.iter().filter_map(|r| r.rel_error).collect();
            let worst = ok.iter().copied().fold(0.0, f64::max);
            let bad = ok.iter().filter(|&&e| !(e <= 1e-8)).count();
            pass &= bad == 0;
            details.push(format!(
                "{:<21} k = {k:>3}: {:>3} successes, {bad:>3} above 1e-8, worst relative error {worst:.2e}",
                algorithm.to_string(),
                ok.len()
            ));
        }
    }
    let (fast, time) = within(start.elapsed(), Duration::from_secs(300));
    let mut out = Outcome::new(
        pass && fast,
        format!("noiseless oracle equivalence at 1e-8 (500 trials per k); {time}"),
    );
    out.details = details;
    out
}

fn submatrix_error_growth() -> Outcome {
    let start = Instant::now();
    let small = trials(Algorithm::Submatrix, 16, 1000, 401, |_| {});
    let large = trials(Algorithm::Submatrix, 128, 1000, 402, |_| {});
    let (e16, e128) = (
        small.mean_error_l2.unwrap_or(f64::NAN),
        large.mean_error_l2.unwrap_or(f64::NAN),
    );
    let ratio = e128 / e16;
    let (fast, time) = within(start.elapsed(), Duration::from_secs(180));
    Outcome::new(
        ratio >= 10.0 && fast,
        format!("submatrix error growth: mean l2 error {e16:.2e} at k = 16, {e128:.2e} at k = 128, ratio {ratio:.2e}; {time}"),
    )
    .detail(format!("failure rates {:.3} at k = 16, {:.3} at k = 128", small.failure_rate, large.failure_rate))
}

fn stability_separation() -> Outcome {
    let start = Instant::now();
    let mut prog = Vec::new();
    let mut opt = Vec::new();
    let mut sub = Vec::new();
    for k in POWERS {
        prog.push(trials(Algorithm::Progressive, k, 1000, 500 + k as u64, |c| {
            c.condition = true
        }));
        opt.push(trials(
            Algorithm::ShiftSample(LevelChoice::OptimalComplexity),
            k,
            1000,
            600 + k as u64,
            |_| {},
        ));
        if k >= 32 {
            sub.push(trials(Algorithm::Submatrix, k, 1000, 700 + k as u64, |c| {
                c.condition = true
            }));
        }
    }
    let block = |r: &AggregateRow| r.mean_unknown_block.unwrap_or(f64::NAN);
    let flat = block(&prog[5]) <= 1.5 * block(&prog[0]);
    let increasing = opt.windows(2).all(|w| block(&w[1]) > block(&w[0]));
    let cond = |r: &AggregateRow| r.mean_log10_cond.unwrap_or(f64::NAN);
    let better = prog[2..].iter().zip(&sub).all(|(p, s)| cond(p) < cond(s));
    let (fast, time) = within(start.elapsed(), Duration::from_secs(600));
    let fmt = |rows: &[AggregateRow], f: &dyn Fn(&AggregateRow) -> f64| {
        rows.iter()
            .map(|r| format!("{:.3}", f(r)))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mean_block = |r: &AggregateRow| r.mean_block.unwrap_or(f64::NAN);
    Outcome::new(
        flat && increasing && better && fast,
        format!("stability separation: progressive flat {flat}, shift-sample growing {increasing}, progressive better conditioned {better}; {time}"),
    )
    .detail(format!("progressive unknown-weighted block, k = 8..256: {}", fmt(&prog, &block)))
    .detail(format!("progressive mean block over blocks:          {}", fmt(&prog, &mean_block)))
    .detail(format!("shift-sample-optimal unknown-weighted block: {}", fmt(&opt, &block)))
    .detail(format!("shift-sample-optimal mean block over blocks: {}", fmt(&opt, &mean_block)))
    .detail(format!("progressive mean log10 cond, k = 32..256:    {}", fmt(&prog[2..], &cond)))
    .detail(format!("submatrix mean log10 cond, k = 32..256:      {}", fmt(&sub, &cond)))
    .detail(format!("submatrix failure rate, k = 32..256:         {}", fmt(&sub, &|r| r.failure_rate)))
}

fn complexity_scaling() -> Outcome {
    let start = Instant::now();
    let rows: Vec<AggregateRow> = POWERS
        .iter()
        .map(|&k| trials(Algorithm::Progressive, k, 1000, 800 + k as u64, |_| {}))
        .collect();
    let ratios: Vec<f64> = rows
        .iter()
        .zip(POWERS)
        .map(|(r, k)| r.mean_ops_actual.unwrap_or(f64::NAN) / (k as f64 * (k as f64).log2()))
        .collect();
    // least squares on relative residuals: minimize sum (ratio_i / c - 1)^2
    let c = ratios.iter().map(|q| q * q).sum::<f64>() / ratios.iter().sum::<f64>();
    let residuals: Vec<f64> = ratios.iter().map(|q| q / c - 1.0).collect();
    let worst = residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
    let (fast, time) = within(start.elapsed(), Duration::from_secs(300));
    Outcome::new(
        worst <= 0.2 && fast,
        format!(
            "complexity scaling: fitted c = {c:.3}, worst relative residual {:.1}%; {time}",
            100.0 * worst
        ),
    )
    .detail(format!(
        "ops / (k log2 k), k = 8..256: {}",
        ratios.iter().map(|q| format!("{q:.3}")).collect::<Vec<_>>().join(", ")
    ))
}

fn probabilistic_guarantees() -> Outcome {
    let start = Instant::now();
    let report = sdft::bench::verify_lemmas(&VerifyConfig::new(10_000, N14, 64, 5, 900)).unwrap();
    let bound = unresolved_root_bound(5, 64);
    let failure_ok = report.failures.rate <= 0.05;
    let root_ok = report.unresolved_root.rate <= 3.0 * bound;
    let singular_ok = report.singular.rate <= 0.01;
    let (fast, time) = within(start.elapsed(), Duration::from_secs(600));
    Outcome::new(
        failure_ok && root_ok && singular_ok && fast,
        format!(
            "probabilistic guarantees (eta 5, k 64): failure {:.3}%, unresolved root {:.3}% vs 3 x {:.3}%, singular {:.3}%; {time}",
            100.0 * report.failures.rate,
            100.0 * report.unresolved_root.rate,
            100.0 * bound,
            100.0 * report.singular.rate
        ),
    )
    .detail(format!(
        "95% CIs: failure [{:.3}%, {:.3}%], unresolved root [{:.3}%, {:.3}%], singular [{:.3}%, {:.3}%]",
        100.0 * report.failures.ci_low,
        100.0 * report.failures.ci_high,
        100.0 * report.unresolved_root.ci_low,
        100.0 * report.unresolved_root.ci_high,
        100.0 * report.singular.ci_low,
        100.0 * report.singular.ci_high
    ))
}

fn invariant_suite() -> Outcome {
    let start = Instant::now();
    let report = sdft::bench::verify_lemmas(&VerifyConfig::new(10_000, N14, 64, 1, 1000)).unwrap();
    let mut details = Vec::new();
    let mut all_checked = true;
    for name in [SKEWNESS_RECURSION, COLUMN_COUNT, ROW_COUNT, LEAF_BOUNDS, NODE_COUNT] {
        let c = report.check(name).unwrap();
        all_checked &= c.checked > 0;
        details.push(format!(
            "{name:<20} {:>8} checked, {} violations",
            c.checked, c.violations
        ));
    }
    let (fast, time) = within(start.elapsed(), Duration::from_secs(300));
    let mut out = Outcome::new(
        report.passed() && all_checked && fast,
        format!(
            "invariant suite (10^4 runs, eta 1, k 64): {} violations over {} merging trees; {time}",
            report.violations(),
            report.merging_trees
        ),
    );
    out.details = details;
    out
}

fn direct_dft(x: &[C64]) -> Vec<C64> {
    let n = x.len();
    (0..n)
        .map(|m| {
            x.iter()
                .enumerate()
                .map(|(t, v)| v * C64::from_polar(1.0, -2.0 * PI * ((m * t) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn rel(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn numerical_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1100);

    let mut alias_worst: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.random_range(1..=10u32);
        let n = 1usize << m;
        let f = Signal::new(random_vec(n, &mut rng)).unwrap();
        let l = rng.random_range(0..=m);
        let t = rng.random_range(0..2 * n as u64);
        let spectrum = direct_dft(f.samples());
        let got = aliased_spectrum(&f, l, t, &mut OpCount::new()).unwrap();
        let size = 1usize << l;
        let want: Vec<C64> = (0..size)
            .map(|c| {
                (c..n)
                    .step_by(size)
                    .map(|j| {
                        spectrum[j] * C64::from_polar(1.0, -2.0 * PI * ((j as u64 * t) % n as u64) as f64 / n as f64)
                    })
                    .sum()
            })
            .collect();
        alias_worst = alias_worst.max(rel(&got, &want));
    }

    let mut shift_worst: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.random_range(1..=10u32);
        let n = 1usize << m;
        let f = Signal::new(random_vec(n, &mut rng)).unwrap();
        let t: i64 = rng.random_range(-(n as i64)..2 * n as i64);
        let base = direct_dft(f.samples());
        let moved = direct_dft(shift(&f, t).samples());
        let phased: Vec<C64> = base
            .iter()
            .enumerate()
            .map(|(mm, v)| {
                v * C64::from_polar(
                    1.0,
                    -2.0 * PI * ((mm as i64 * t).rem_euclid(n as i64)) as f64 / n as f64,
                )
            })
            .collect();
        shift_worst = shift_worst.max(rel(&moved, &phased));
    }

    let mut fft_worst: f64 = 0.0;
    for m in 0..=10u32 {
        let x = random_vec(1 << m, &mut rng);
        let got = fft_pow2(&x, Direction::Forward, &mut OpCount::new()).unwrap();
        fft_worst = fft_worst.max(rel(&got, &direct_dft(&x)));
    }

    let (fast, time) = within(start.elapsed(), Duration::from_secs(60));
    let pass = alias_worst <= 1e-10 && shift_worst <= 1e-10 && fft_worst <= 1e-12 && fast;
    Outcome::new(
        pass,
        format!(
            "numerical identities: aliasing {alias_worst:.1e}, shift phase {shift_worst:.1e} (1000 checks each), FFT vs direct {fft_worst:.1e}; {time}"
        ),
    )
}

fn main() {
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("worked-example", worked_example_op_count),
        ("walkthrough", walkthrough_resolution_pattern),
        ("oracle", oracle_equivalence),
        ("error-growth", submatrix_error_growth),
        ("stability", stability_separation),
        ("complexity", complexity_scaling),
        ("probability", probabilistic_guarantees),
        ("invariants", invariant_suite),
        ("identities", numerical_identities),
    ];
    let mut failed = 0;
    let mut out = std::io::stdout().lock();
    for (name, run) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let outcome = run();
        failed += usize::from(!outcome.pass);
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        writeln!(out, "[{tag}] {}", outcome.summary).unwrap();
        for d in &outcome.details {
            writeln!(out, "       {d}").unwrap();
        }
        out.flush().unwrap();
    }
    if failed > 0 {
        writeln!(out, "{failed} acceptance criteria failed").unwrap();
        std::process::exit(1);
    }
}
