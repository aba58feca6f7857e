//! `sdft`: compute sparse DFTs, run benchmark sweeps and verify the
//! structural invariants of the progressive algorithm.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 algorithm failure
//! (singular block or underdetermined system), 3 invariant violation found
//! by `verify`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdft::baselines::{resolve_level, shift_and_sample, submatrix_method, LevelChoice};
use sdft::bench::{
    aggregate, aggregate_and_emit, run_trials, verify_lemmas, Algorithm, NoiseSpec, OutputFormat, TrialConfig,
    VerifyConfig,
};
use sdft::progressive::{execute, NodeStatus, ProgressiveConfig};
use sdft::signal::{random_coefficients, synthesize_signal};
use sdft::{io as sio, RunContext, RunReport, SparseSpectrum, SupportSet};
use serde_json::json;

const DEFAULT_N: usize = 1 << 14;

#[derive(Parser, Debug)]
#[command(name = "sdft", version, about = "DFT computation with known frequency support")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Signal length, a power of two.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, global = true)]
    format: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Recover the coefficients on a support from one signal.
    Compute(ComputeArgs),
    /// Monte-Carlo sweep over support sizes, noise levels and algorithms.
    Bench(BenchArgs),
    /// Check the progressive algorithm's invariants on random supports.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct ComputeArgs {
    /// Inline comma-separated indices or a JSON file holding an array of them.
    #[arg(long)]
    support: String,
    /// `synthesize` for Gaussian coefficients on the support, or a signal
    /// file (`.csv` text, anything else binary).
    #[arg(long, default_value = "synthesize")]
    signal: String,
    /// submatrix, shift-sample or progressive.
    #[arg(long, default_value = "progressive")]
    algo: String,
    #[arg(long, default_value_t = 1)]
    eta: usize,
    /// auto-stable, auto-optimal or an integer level. Defaults to
    /// auto-optimal for shift-sample and auto-stable for progressive.
    #[arg(long)]
    level: Option<LevelChoice>,
    /// Include the execution trace and the annotated tree.
    #[arg(long)]
    trace: bool,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "8,32,256")]
    k_set: Vec<usize>,
    /// SNR values in dB; `none` for a noiseless run.
    #[arg(long, value_delimiter = ',', default_value = "none")]
    snr_set: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "shift-sample-optimal,shift-sample-stable,progressive"
    )]
    algos: Vec<Algorithm>,
    #[arg(long, default_value_t = 1)]
    eta: usize,
    /// Estimate the condition number of every solved block.
    #[arg(long)]
    cond: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    eta: usize,
    #[arg(long, default_value_t = 64)]
    k: usize,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Algorithm(sdft::Error),
    Violations,
}

impl From<sdft::Error> for Failure {
    fn from(e: sdft::Error) -> Self {
        if e.is_algorithm_failure() {
            Failure::Algorithm(e)
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Algorithm(e)) => {
            eprintln!("algorithm failure: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Violations) => ExitCode::from(3),
    }
}

fn run(cli: Cli) -> CliResult {
    configure_threads()?;
    let format = cli
        .common
        .format
        .as_deref()
        .map(str::parse::<OutputFormat>)
        .transpose()?;
    if let Some(n) = cli.common.n {
        if n == 0 || !n.is_power_of_two() {
            return Err(usage(format!("--n must be a power of two, got {n}")));
        }
    }
    match cli.command {
        Command::Compute(args) => compute(&cli.common, format.unwrap_or(OutputFormat::Json), args),
        Command::Bench(args) => bench(&cli.common, format.unwrap_or(OutputFormat::Csv), args),
        Command::Verify(args) => verify(&cli.common, format, args),
    }
}

/// Size the worker pool from `SDFT_THREADS` (unset or 0: all cores).
fn configure_threads() -> CliResult {
    let Ok(value) = std::env::var("SDFT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| usage(format!("SDFT_THREADS must be a non-negative integer, got `{value}`")))?;
    #[cfg(feature = "parallel")]
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, text)?;
        }
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_support(spec: &str, n: usize) -> CliResult<SupportSet> {
    let inline: Result<Vec<usize>, _> = spec.split(',').map(|s| s.trim().parse::<usize>()).collect();
    let indices = match inline {
        Ok(v) => v,
        Err(_) => {
            let text = fs::read_to_string(spec).map_err(|e| {
                usage(format!(
                    "--support `{spec}` is neither an index list nor a readable file: {e}"
                ))
            })?;
            serde_json::from_str(&text).map_err(|e| usage(format!("{spec}: expected a JSON array of indices: {e}")))?
        }
    };
    Ok(SupportSet::new(indices, n)?)
}

fn compute(common: &Common, format: OutputFormat, args: ComputeArgs) -> CliResult {
    let mut truth = None;
    let (signal, n) = if args.signal == "synthesize" {
        let n = common.n.unwrap_or(DEFAULT_N);
        let support = parse_support(&args.support, n)?;
        let coeffs = random_coefficients(&support, &mut ChaCha8Rng::seed_from_u64(common.seed));
        let f = synthesize_signal(&coeffs);
        truth = Some(coeffs);
        (f, n)
    } else {
        let f = sio::load_signal(Path::new(&args.signal))?;
        if let Some(n) = common.n.filter(|&n| n != f.len()) {
            return Err(usage(format!("--n {n} does not match the signal length {}", f.len())));
        }
        let n = f.len();
        (f, n)
    };
    let support = parse_support(&args.support, n)?;
    let oracle = SparseSpectrum::restrict(&signal.spectrum(), &support)?;
    let mut ctx = RunContext::new();

    let mut doc = json!({ "n": n, "support_size": support.len(), "seed": common.seed });
    let outcome = match args.algo.as_str() {
        "submatrix" => submatrix_method(&signal, &support, &mut ctx).map(|rec| (rec.spectrum, rec.report)),
        "shift-sample" => {
            let choice = args.level.unwrap_or(LevelChoice::OptimalComplexity);
            let r = resolve_level(choice, support.len());
            let result = shift_and_sample(&signal, &support, choice, &mut ctx);
            if args.trace {
                let tree = sdft::tree::build_tree(&support, r.min(support.m_log2()))?;
                doc["tree"] = tree.to_json(|_| None);
            }
            result.map(|rec| (rec.spectrum, rec.report))
        }
        "progressive" => {
            let start_level = args.level.map(|c| resolve_level(c, support.len()));
            let cfg = ProgressiveConfig {
                eta: args.eta,
                start_level,
                trace: true,
                ..Default::default()
            };
            let exec = execute(&signal, &support, &cfg, &mut ctx)?;
            let trace = exec.trace.as_ref().expect("trace requested");
            if args.trace {
                doc["tree"] = exec.tree.to_json(|key| {
                    trace
                        .nodes()
                        .filter(|t| t.key() == key)
                        .last()
                        .and_then(|t| serde_json::to_value(t.status).ok())
                        .and_then(|v| v.as_str().map(String::from))
                });
                doc["trace"] = serde_json::to_value(trace)?;
            }
            match exec.failure {
                None => {
                    let coeffs = exec
                        .coefficients
                        .into_iter()
                        .map(|c| c.expect("known after success"))
                        .collect();
                    Ok((SparseSpectrum::new(support.clone(), coeffs)?, exec.report))
                }
                Some(e) => {
                    doc["report"] = serde_json::to_value(&exec.report)?;
                    if let Some(last) = trace.stages.last() {
                        let open: Vec<String> = last
                            .nodes
                            .iter()
                            .filter(|t| t.status == NodeStatus::Unresolved)
                            .map(|t| t.key().to_string())
                            .collect();
                        if !open.is_empty() {
                            eprintln!("unresolved node(s) at level {}: {}", last.level, open.join(", "));
                        }
                    }
                    Err(e)
                }
            }
        }
        other => {
            return Err(usage(format!(
                "unknown --algo `{other}` (submatrix, shift-sample, progressive)"
            )))
        }
    };

    let (spectrum, report) = match outcome {
        Ok(v) => v,
        Err(e) if e.is_algorithm_failure() => {
            doc["success"] = json!(false);
            doc["failure"] = json!(e.to_string());
            if format == OutputFormat::Json {
                emit(common.out.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"))?;
            }
            return Err(Failure::Algorithm(e));
        }
        Err(e) => return Err(e.into()),
    };
    let oracle_error = spectrum.relative_error(&oracle)?;
    log::info!("{}", summary(&report, oracle_error));
    match format {
        OutputFormat::Json => {
            doc["success"] = json!(true);
            doc["oracle_relative_error"] = json!(oracle_error);
            if let Some(t) = &truth {
                doc["truth_relative_error"] = json!(spectrum.relative_error(t)?);
            }
            doc["report"] = serde_json::to_value(&report)?;
            doc["spectrum"] = serde_json::to_value(&spectrum)?;
            emit(common.out.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"))?;
        }
        OutputFormat::Csv => {
            let mut text = String::from("index,re,im\n");
            for (j, c) in spectrum.iter() {
                text += &format!("{j},{},{}\n", c.re, c.im);
            }
            emit(common.out.as_deref(), &text)?;
            eprintln!("{}", summary(&report, oracle_error));
        }
    }
    Ok(())
}

fn summary(report: &RunReport, oracle_error: f64) -> String {
    format!(
        "{}: ffts {:?}, blocks {:?}, ops {} (model {}), relative error vs oracle {:.3e}",
        report.algorithm, report.fft_sizes, report.block_sizes, report.ops_actual, report.ops_paper_model, oracle_error
    )
}

fn parse_snr(s: &str) -> CliResult<NoiseSpec> {
    match s.trim() {
        "none" | "inf" => Ok(NoiseSpec::none()),
        v => v
            .parse::<f64>()
            .map(NoiseSpec::snr)
            .map_err(|_| usage(format!("bad SNR value `{v}` (dB or `none`)"))),
    }
}

fn bench(common: &Common, format: OutputFormat, args: BenchArgs) -> CliResult {
    let n = common.n.unwrap_or(DEFAULT_N);
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    if let Some(&k) = args.k_set.iter().find(|&&k| k == 0 || k > n) {
        return Err(usage(format!("k-set value {k} is outside 1..={n}")));
    }
    let noises = args
        .snr_set
        .iter()
        .map(|s| parse_snr(s))
        .collect::<CliResult<Vec<_>>>()?;

    let mut records = Vec::new();
    let mut error = None;
    'sweep: for &algorithm in &args.algos {
        for noise in &noises {
            for &k in &args.k_set {
                let cfg = TrialConfig {
                    eta: args.eta,
                    noise: *noise,
                    seed: common.seed,
                    condition: args.cond,
                    ..TrialConfig::new(algorithm, n, k)
                };
                match run_trials(&cfg, args.trials) {
                    Ok(r) => records.extend(r),
                    Err(e) => {
                        error = Some(e);
                        break 'sweep;
                    }
                }
            }
        }
    }
    if !records.is_empty() {
        match &common.out {
            Some(path) => {
                for written in aggregate_and_emit(&records, path, format)? {
                    eprintln!("wrote {}", written.display());
                }
            }
            None => {
                let rows = aggregate(&records)?;
                let mut buf = Vec::new();
                match format {
                    OutputFormat::Csv => sdft::bench::aggregate::write_csv(&rows, &mut buf)?,
                    OutputFormat::Json => {
                        serde_json::to_writer_pretty(&mut buf, &rows)?;
                        buf.push(b'\n');
                    }
                }
                io::stdout().lock().write_all(&buf)?;
            }
        }
    }
    match error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn verify(common: &Common, format: Option<OutputFormat>, args: VerifyArgs) -> CliResult {
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    if format == Some(OutputFormat::Csv) {
        return Err(usage("verify writes text or JSON; use --format json"));
    }
    let n = common.n.unwrap_or(DEFAULT_N);
    let cfg = VerifyConfig::new(args.trials, n, args.k, args.eta, common.seed);
    let report = verify_lemmas(&cfg)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    match format {
        Some(OutputFormat::Json) => emit(common.out.as_deref(), &json)?,
        _ => {
            print!("{}", report.summary());
            if let Some(path) = &common.out {
                emit(Some(path), &json)?;
            }
        }
    }
    if report.passed() {
        return Ok(());
    }
    let dir = common
        .out
        .as_deref()
        .and_then(Path::parent)
        .filter(|d| !d.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let path = dir.join("counterexamples.json");
    fs::write(&path, serde_json::to_string_pretty(&report.counterexamples)?)?;
    for c in &report.counterexamples {
        eprintln!("violation of {} in trial {}: {}", c.invariant, c.trial, c.detail);
    }
    eprintln!("counterexample traces written to {}", path.display());
    Err(Failure::Violations)
}
