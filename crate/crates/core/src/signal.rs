//! Signals, support sets, sparse spectra and the time-domain operators that
//! generate aliased measurements.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::fft::{fft_in_place, fft_pow2, Direction};
use crate::ops::OpCount;
use crate::{Error, Result, C64};

/// A length-`N` time-domain signal, `N = 2^m_log2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    samples: Vec<C64>,
    m_log2: u32,
}

impl Signal {
    pub fn new(samples: Vec<C64>) -> Result<Self> {
        let n = samples.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::invalid(format!("signal length must be a power of two, got {n}")));
        }
        Ok(Self {
            m_log2: n.trailing_zeros(),
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn m_log2(&self) -> u32 {
        self.m_log2
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<C64> {
        self.samples
    }

    /// Sample at `index mod N`, for any signed index.
    #[inline]
    pub fn at(&self, index: i64) -> C64 {
        let n = self.samples.len() as i64;
        self.samples[index.rem_euclid(n) as usize]
    }

    /// Full forward DFT, computed with the FFT.
    pub fn spectrum(&self) -> Vec<C64> {
        fft_pow2(&self.samples, Direction::Forward, &mut OpCount::new()).expect("signal length is a power of two")
    }
}

/// Sorted set of distinct frequency indices in `[0, N)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SupportSet {
    indices: Vec<usize>,
    n: usize,
}

impl SupportSet {
    /// Build from indices in any order. Duplicates, out-of-range entries, an
    /// empty set and a non power-of-two `n` are rejected.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::invalid(format!(
                "ambient length must be a power of two, got {n}"
            )));
        }
        if indices.is_empty() {
            return Err(Error::invalid("support set is empty"));
        }
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate frequency {}", w[0])));
        }
        if let Some(&j) = indices.last().filter(|&&j| j >= n) {
            return Err(Error::invalid(format!("frequency {j} outside [0, {n})")));
        }
        Ok(Self { indices, n })
    }

    /// All of `Z_N`.
    pub fn full(n: usize) -> Result<Self> {
        Self::new((0..n).collect(), n)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m_log2(&self) -> u32 {
        self.n.trailing_zeros()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    pub fn position(&self, j: usize) -> Option<usize> {
        self.indices.binary_search(&j).ok()
    }
}

/// Coefficients on a support set, stored aligned with its sorted indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSpectrum {
    support: SupportSet,
    coeffs: Vec<C64>,
}

impl SparseSpectrum {
    pub fn new(support: SupportSet, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != support.len() {
            return Err(Error::invalid(format!(
                "{} coefficients for a support of size {}",
                coeffs.len(),
                support.len()
            )));
        }
        Ok(Self { support, coeffs })
    }

    /// Build from `(index, value)` pairs; the keys must be exactly `support`.
    pub fn from_pairs(support: &SupportSet, pairs: impl IntoIterator<Item = (usize, C64)>) -> Result<Self> {
        let mut slots: Vec<Option<C64>> = vec![None; support.len()];
        for (j, v) in pairs {
            let pos = support
                .position(j)
                .ok_or_else(|| Error::invalid(format!("coefficient key {j} is outside the support")))?;
            slots[pos] = Some(v);
        }
        let coeffs = slots
            .into_iter()
            .zip(support.indices())
            .map(|(v, j)| v.ok_or_else(|| Error::invalid(format!("missing coefficient for {j}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            support: support.clone(),
            coeffs,
        })
    }

    /// Restriction of a full length-`N` spectrum to `support`.
    pub fn restrict(full: &[C64], support: &SupportSet) -> Result<Self> {
        if full.len() != support.n() {
            return Err(Error::invalid("spectrum length does not match the support modulus"));
        }
        let coeffs = support.indices().iter().map(|&j| full[j]).collect();
        Ok(Self {
            support: support.clone(),
            coeffs,
        })
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn get(&self, j: usize) -> Option<C64> {
        self.support.position(j).map(|p| self.coeffs[p])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, C64)> + '_ {
        self.support.indices().iter().copied().zip(self.coeffs.iter().copied())
    }

    /// Dense length-`N` spectrum, zero off the support.
    pub fn to_full(&self) -> Vec<C64> {
        let mut full = vec![C64::new(0.0, 0.0); self.support.n()];
        for (j, v) in self.iter() {
            full[j] = v;
        }
        full
    }

    /// `||self - other||_2` over the shared support.
    pub fn l2_distance(&self, other: &SparseSpectrum) -> Result<f64> {
        if self.support != other.support {
            return Err(Error::invalid("spectra live on different supports"));
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `||self - reference|| / ||reference||`.
    pub fn relative_error(&self, reference: &SparseSpectrum) -> Result<f64> {
        let norm = reference.l2_norm();
        let dist = self.l2_distance(reference)?;
        Ok(if norm > 0.0 { dist / norm } else { dist })
    }

    /// Mean squared magnitude of the coefficients.
    pub fn mean_power(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.coeffs.len() as f64
    }
}

#[derive(Serialize, Deserialize)]
struct SpectrumFile {
    n: usize,
    coeffs: BTreeMap<usize, [f64; 2]>,
}

impl Serialize for SparseSpectrum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpectrumFile {
            n: self.support.n(),
            coeffs: self.iter().map(|(j, v)| (j, [v.re, v.im])).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SparseSpectrum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = SpectrumFile::deserialize(d)?;
        let support = SupportSet::new(file.coeffs.keys().copied().collect(), file.n).map_err(D::Error::custom)?;
        let coeffs = file.coeffs.values().map(|&[re, im]| C64::new(re, im)).collect();
        SparseSpectrum::new(support, coeffs).map_err(D::Error::custom)
    }
}

/// `e^{-2 pi i t j / n}` with `t j` reduced modulo `n` in integer arithmetic.
#[inline]
pub fn unit_root(t: u64, j: usize, n: usize) -> C64 {
    let e = ((t as u128 * j as u128) % n as u128) as f64;
    C64::from_polar(1.0, -2.0 * PI * e / n as f64)
}

/// Delay by `t`: `out(n) = f((n - t) mod N)`.
pub fn shift(f: &Signal, t: i64) -> Signal {
    let samples = (0..f.len() as i64).map(|n| f.at(n - t)).collect();
    Signal {
        samples,
        m_log2: f.m_log2,
    }
}

/// Keep every `2^d_log2`-th sample: `out(n) = f(n 2^d_log2)`.
pub fn downsample(f: &Signal, d_log2: u32) -> Result<Signal> {
    if d_log2 > f.m_log2 {
        return Err(Error::invalid(format!(
            "cannot downsample a length-2^{} signal by 2^{d_log2}",
            f.m_log2
        )));
    }
    let samples = f.samples.iter().step_by(1 << d_log2).copied().collect();
    Ok(Signal {
        samples,
        m_log2: f.m_log2 - d_log2,
    })
}

/// Standard complex Gaussian coefficients (`E|c|^2 = 1`) on `support`.
pub fn random_coefficients<R: Rng + ?Sized>(support: &SupportSet, rng: &mut R) -> SparseSpectrum {
    let coeffs = (0..support.len())
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect();
    SparseSpectrum {
        support: support.clone(),
        coeffs,
    }
}

/// The time-domain signal whose DFT equals `coeffs` on its support and zero
/// elsewhere.
pub fn synthesize_signal(coeffs: &SparseSpectrum) -> Signal {
    let mut buf = coeffs.to_full();
    fft_in_place(&mut buf, Direction::Inverse, &mut OpCount::new()).expect("support modulus is a power of two");
    Signal::new(buf).expect("support modulus is a power of two")
}

/// Aliased spectrum at `level`: the `2^level`-point DFT of the signal delayed
/// by `t` and downsampled by `2^{M - level}`, rescaled by `2^{M - level}` so
/// that entry `c` equals `sum_{j = c mod 2^level} F f(j) e^{-2 pi i j t / N}`.
///
/// Only the `2^level` samples that survive downsampling are read.
pub fn aliased_spectrum(f: &Signal, level: u32, t: u64, ops: &mut OpCount) -> Result<Vec<C64>> {
    if level > f.m_log2 {
        return Err(Error::invalid(format!("level {level} exceeds log2 N = {}", f.m_log2)));
    }
    let size = 1usize << level;
    let step = 1i64 << (f.m_log2 - level);
    let t = (t % f.len() as u64) as i64;
    let mut buf: Vec<C64> = (0..size as i64).map(|n| f.at(n * step - t)).collect();
    fft_in_place(&mut buf, Direction::Forward, ops)?;
    ops.model_fft(size);
    if step > 1 {
        let scale = step as f64;
        for v in &mut buf {
            *v *= scale;
        }
        ops.mul(size as u64);
    }
    Ok(buf)
}
