//! Monte-Carlo harness: random supports, noise, trials, aggregation and the
//! invariant verifier.

pub mod aggregate;
pub mod noise;
pub mod sampling;
pub mod trial;
pub mod verify;

pub use aggregate::{aggregate, aggregate_and_emit, AggregateRow, OutputFormat};
pub use noise::{add_noise, NoiseInjector, NoiseSpec};
pub use sampling::sample_support;
pub use trial::{run_trial, run_trials, run_trials_sequential, Algorithm, BenchRecord, TrialConfig};
pub use verify::{verify_lemmas, VerificationReport, VerifyConfig};
