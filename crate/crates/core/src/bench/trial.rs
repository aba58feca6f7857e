use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::noise::{NoiseInjector, NoiseSpec};
use super::sampling::sample_support;
use crate::baselines::{ceil_log2, resolve_level, shift_and_sample, submatrix_method, LevelChoice};
use crate::progressive::{execute, ProgressiveConfig};
use crate::signal::{random_coefficients, synthesize_signal};
use crate::{parallel, Error, Result, RunContext, RunReport, SparseSpectrum};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Submatrix,
    ShiftSample(LevelChoice),
    Progressive,
}

impl Algorithm {
    /// The three curves of the stability comparison.
    pub const STANDARD: [Algorithm; 3] = [
        Algorithm::ShiftSample(LevelChoice::OptimalComplexity),
        Algorithm::ShiftSample(LevelChoice::Stable),
        Algorithm::Progressive,
    ];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Submatrix => f.write_str("submatrix"),
            Algorithm::ShiftSample(LevelChoice::OptimalComplexity) => f.write_str("shift-sample-optimal"),
            Algorithm::ShiftSample(LevelChoice::Stable) => f.write_str("shift-sample-stable"),
            Algorithm::ShiftSample(LevelChoice::Explicit(r)) => write!(f, "shift-sample-r{r}"),
            Algorithm::Progressive => f.write_str("progressive"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "submatrix" => Algorithm::Submatrix,
            "shift-sample" | "shift-sample-optimal" => Algorithm::ShiftSample(LevelChoice::OptimalComplexity),
            "shift-sample-stable" => Algorithm::ShiftSample(LevelChoice::Stable),
            "progressive" => Algorithm::Progressive,
            other => match other.strip_prefix("shift-sample-r").map(str::parse) {
                Some(Ok(r)) => Algorithm::ShiftSample(LevelChoice::Explicit(r)),
                _ => return Err(Error::invalid(format!("unknown algorithm `{other}`"))),
            },
        })
    }
}

impl Serialize for Algorithm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Algorithm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub algorithm: Algorithm,
    pub n: usize,
    /// Expected support size; also fixes the tree levels.
    pub k: usize,
    pub eta: usize,
    pub noise: NoiseSpec,
    pub seed: u64,
    /// Estimate the condition number of every block.
    pub condition: bool,
}

impl TrialConfig {
    pub fn new(algorithm: Algorithm, n: usize, k: usize) -> Self {
        Self {
            algorithm,
            n,
            k,
            eta: 1,
            noise: NoiseSpec::none(),
            seed: 0,
            condition: false,
        }
    }

    /// Tree level used for this configuration, if the algorithm has one.
    pub fn level(&self) -> Option<u32> {
        let m = self.n.trailing_zeros();
        match self.algorithm {
            Algorithm::Submatrix => None,
            Algorithm::ShiftSample(choice) => Some(resolve_level(choice, self.k).min(m)),
            Algorithm::Progressive => Some(ceil_log2(self.k).min(m)),
        }
    }
}

/// Outcome of one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub algorithm: Algorithm,
    pub eta: usize,
    pub r: Option<u32>,
    pub snr_db: Option<f64>,
    pub seed: u64,
    pub trial: usize,
    /// Size of the drawn support.
    pub support_size: usize,
    pub success: bool,
    pub failure: Option<String>,
    pub singular: bool,
    pub underdetermined: bool,
    /// `||estimate - oracle||_2`, present exactly when `success`.
    pub error_l2: Option<f64>,
    pub rel_error: Option<f64>,
    pub mean_block: f64,
    pub unknown_mean_block: f64,
    pub max_block: usize,
    pub ops_actual: u64,
    pub ops_paper_model: u64,
    pub mean_log10_cond: Option<f64>,
}

/// Run trial number `trial` of `cfg`. The trial draws from its own stream of
/// the seeded generator, so results do not depend on scheduling.
pub fn run_trial(cfg: &TrialConfig, trial: usize) -> Result<BenchRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64);

    let support = sample_support(cfg.n, cfg.k, &mut rng)?;
    let coeffs = random_coefficients(&support, &mut rng);
    let f = synthesize_signal(&coeffs);
    let oracle = SparseSpectrum::restrict(&f.spectrum(), &support)?;

    let mut ctx = RunContext::new();
    let noise_seed: u64 = rng.random();
    let cond_seed: u64 = rng.random();
    if let Some(sigma) = cfg.noise.sigma(oracle.mean_power())? {
        ctx = ctx.with_noise(NoiseInjector::new(sigma, noise_seed));
    }
    if cfg.condition {
        ctx = ctx.with_condition_numbers(cond_seed);
    }

    let r = cfg.level();
    let outcome: (Option<SparseSpectrum>, Option<RunReport>, Option<Error>) = match cfg.algorithm {
        Algorithm::Submatrix => split(submatrix_method(&f, &support, &mut ctx)),
        Algorithm::ShiftSample(_) => {
            let level = LevelChoice::Explicit(r.expect("shift-sample has a level"));
            split(shift_and_sample(&f, &support, level, &mut ctx))
        }
        Algorithm::Progressive => {
            let pcfg = ProgressiveConfig {
                eta: cfg.eta,
                start_level: r,
                ..Default::default()
            };
            let exec = execute(&f, &support, &pcfg, &mut ctx)?;
            match exec.failure {
                None => {
                    let values = exec.coefficients.into_iter().map(Option::unwrap).collect();
                    (
                        Some(SparseSpectrum::new(support.clone(), values)?),
                        Some(exec.report),
                        None,
                    )
                }
                Some(e) => (None, Some(exec.report), Some(e)),
            }
        }
    };
    let (spectrum, report, failure) = outcome;
    if let Some(e) = &failure {
        if !e.is_algorithm_failure() {
            return Err(failure.unwrap());
        }
    }
    let report = report.unwrap_or_default();
    let (error_l2, rel_error) = match &spectrum {
        Some(s) => (Some(s.l2_distance(&oracle)?), Some(s.relative_error(&oracle)?)),
        None => (None, None),
    };
    Ok(BenchRecord {
        k: cfg.k,
        n: cfg.n,
        algorithm: cfg.algorithm,
        eta: cfg.eta,
        r,
        snr_db: cfg.noise.snr_db,
        seed: cfg.seed,
        trial,
        support_size: support.len(),
        success: spectrum.is_some(),
        singular: matches!(failure, Some(Error::Singular { .. })),
        underdetermined: matches!(failure, Some(Error::Underdetermined { .. })),
        failure: failure.map(|e| e.to_string()),
        error_l2,
        rel_error,
        mean_block: report.mean_block(),
        unknown_mean_block: report.unknown_weighted_mean_block(),
        max_block: report.max_block(),
        ops_actual: report.ops_actual,
        ops_paper_model: report.ops_paper_model,
        mean_log10_cond: report.mean_log10_cond(),
    })
}

fn split(r: Result<crate::Recovery>) -> (Option<SparseSpectrum>, Option<RunReport>, Option<Error>) {
    match r {
        Ok(rec) => (Some(rec.spectrum), Some(rec.report), None),
        Err(e) => (None, None, Some(e)),
    }
}

/// Trials `0..trials` of `cfg`, in trial order.
pub fn run_trials(cfg: &TrialConfig, trials: usize) -> Result<Vec<BenchRecord>> {
    parallel::map_trials(trials, |i| run_trial(cfg, i))
        .into_iter()
        .collect()
}

/// Same as [`run_trials`] on the calling thread only.
pub fn run_trials_sequential(cfg: &TrialConfig, trials: usize) -> Result<Vec<BenchRecord>> {
    parallel::map_trials_sequential(trials, |i| run_trial(cfg, i))
        .into_iter()
        .collect()
}
