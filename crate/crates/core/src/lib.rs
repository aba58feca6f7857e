//! DFT computation for signals whose frequency support is known in advance.
//!
//! For a length-`N` signal (`N` a power of two) whose spectrum vanishes outside
//! a known set `J`, this crate recovers the coefficients on `J` three ways:
//!
//! * [`baselines::submatrix_method`]: one `k x k` Vandermonde solve from `k`
//!   consecutive time samples.
//! * [`baselines::shift_and_sample`]: aliased DFTs of shifted, downsampled
//!   copies of the signal, decoded node-by-node on a congruence tree.
//! * [`progressive::progressive_sdft`]: the shift-and-progressive-sample
//!   scheme, which halves the sampling rate at every stage while keeping the
//!   decoded systems small.
//!
//! The [`bench`] module holds the Monte-Carlo harness used to measure error,
//! block sizes, conditioning and operation counts, together with a verifier
//! for the structural invariants of the progressive algorithm.

pub mod baselines;
pub mod bench;
mod context;
mod error;
pub mod fft;
pub mod io;
pub mod linalg;
pub mod ops;
pub mod parallel;
pub mod progressive;
mod report;
pub mod signal;
pub mod tree;

pub use context::RunContext;
pub use error::{Error, Result};
pub use report::{Recovery, RunReport};
pub use signal::{Signal, SparseSpectrum, SupportSet};

/// Complex sample type used throughout the crate.
pub type C64 = num_complex::Complex64;
