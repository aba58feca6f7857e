use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// White Gaussian noise at a fixed SNR, or none.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: Option<f64>,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self { snr_db: None }
    }

    pub fn snr(db: f64) -> Self {
        Self { snr_db: Some(db) }
    }

    /// Per-entry standard deviation for a reference power, `None` when
    /// noiseless.
    pub fn sigma(&self, signal_power: f64) -> Result<Option<f64>> {
        let Some(db) = self.snr_db else { return Ok(None) };
        if !db.is_finite() {
            return Err(Error::invalid(format!("SNR must be finite, got {db}")));
        }
        if !(signal_power > 0.0) {
            return Err(Error::invalid("signal power must be positive"));
        }
        Ok(Some((signal_power / 10f64.powf(db / 10.0)).sqrt()))
    }
}

fn circular_gaussian<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> C64 {
    let s = sigma * std::f64::consts::FRAC_1_SQRT_2;
    C64::new(
        rng.sample::<f64, _>(StandardNormal) * s,
        rng.sample::<f64, _>(StandardNormal) * s,
    )
}

/// `b` plus circular complex Gaussian noise of variance
/// `signal_power / 10^{snr/10}` per entry.
pub fn add_noise<R: Rng + ?Sized>(b: &[C64], spec: &NoiseSpec, signal_power: f64, rng: &mut R) -> Result<Vec<C64>> {
    let Some(sigma) = spec.sigma(signal_power)? else {
        return Ok(b.to_vec());
    };
    Ok(b.iter().map(|v| v + circular_gaussian(sigma, rng)).collect())
}

/// Noise source owned by one run; perturbs every block right-hand side.
#[derive(Clone, Debug)]
pub struct NoiseInjector {
    sigma: f64,
    rng: ChaCha8Rng,
}

impl NoiseInjector {
    pub fn new(sigma: f64, seed: u64) -> Self {
        Self {
            sigma,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn perturb(&mut self, b: &mut [C64]) {
        for v in b {
            *v += circular_gaussian(self.sigma, &mut self.rng);
        }
    }
}
