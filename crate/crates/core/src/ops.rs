//! Arithmetic-operation accounting.
//!
//! Every algorithm threads an [`OpCount`] through its FFTs, subtractions and
//! solves. Two totals are kept side by side: the instrumented count of complex
//! additions, multiplications and divisions actually executed, and a coarse
//! model that charges `1.5 n log2 n` per `n`-point FFT and a fixed price per
//! solved block (see [`cost_model`]).

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCount {
    pub complex_adds: u64,
    pub complex_mults: u64,
    pub complex_divs: u64,
    pub paper_model_total: u64,
}

impl OpCount {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, n: u64) {
        self.complex_adds += n;
    }

    #[inline]
    pub fn mul(&mut self, n: u64) {
        self.complex_mults += n;
    }

    #[inline]
    pub fn div(&mut self, n: u64) {
        self.complex_divs += n;
    }

    /// Charge one `n`-point FFT to the cost model.
    pub fn model_fft(&mut self, n: usize) {
        self.paper_model_total += fft_model_cost(n);
    }

    /// Charge one `m x m` solve to the cost model.
    pub fn model_solve(&mut self, m: usize) {
        self.paper_model_total += solve_model_cost(m);
    }

    /// Instrumented total: additions + multiplications + divisions.
    pub fn total(&self) -> u64 {
        self.complex_adds + self.complex_mults + self.complex_divs
    }

    pub fn absorb(&mut self, other: &OpCount) {
        self.complex_adds += other.complex_adds;
        self.complex_mults += other.complex_mults;
        self.complex_divs += other.complex_divs;
        self.paper_model_total += other.paper_model_total;
    }
}

/// `1.5 n log2 n`, the price of an `n`-point radix-2 FFT in the cost model.
pub fn fft_model_cost(n: usize) -> u64 {
    assert!(n.is_power_of_two(), "FFT size must be a power of two");
    let log = n.trailing_zeros() as u64;
    // 1.5 n log n is integral for every n >= 2; n = 1 costs nothing.
    (3 * n as u64 * log) / 2
}

/// Price of solving an `m x m` block in the cost model: a single division for
/// `m = 1`, 5 for the 2x2 case, and `6 m^2` otherwise (the rate used for the
/// direct `k x k` method).
pub fn solve_model_cost(m: usize) -> u64 {
    match m {
        0 => 0,
        1 => 1,
        2 => 5,
        m => 6 * (m as u64) * (m as u64),
    }
}

/// `(fft cost of size n, solve cost of size m)` under the cost model.
pub fn cost_model(fft_size: usize, solve_size: usize) -> (u64, u64) {
    (fft_model_cost(fft_size), solve_model_cost(solve_size))
}
