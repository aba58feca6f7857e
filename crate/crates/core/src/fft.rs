//! Iterative radix-2 FFT with bit-reversal reordering.
//!
//! Forward kernel is `e^{-2 pi i m n / len}`; the inverse uses the conjugate
//! kernel and scales by `1/len`. Every butterfly is charged one complex
//! multiplication and two complex additions, including the ones whose twiddle
//! is exactly 1, so counts depend only on the transform length.

use std::f64::consts::PI;

use crate::ops::OpCount;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Transform `x` (length a power of two) and return the result.
pub fn fft_pow2(x: &[C64], direction: Direction, ops: &mut OpCount) -> Result<Vec<C64>> {
    let mut out = x.to_vec();
    fft_in_place(&mut out, direction, ops)?;
    Ok(out)
}

pub fn fft_in_place(buf: &mut [C64], direction: Direction, ops: &mut OpCount) -> Result<()> {
    let n = buf.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::invalid(format!("FFT length must be a power of two, got {n}")));
    }
    if n == 1 {
        return Ok(());
    }

    bit_reverse_permute(buf);

    let twiddles = twiddle_table(n, direction);
    let mut half = 1;
    while half < n {
        let stride = n / (2 * half);
        for start in (0..n).step_by(2 * half) {
            let (lo, hi) = buf[start..start + 2 * half].split_at_mut(half);
            for (j, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let t = *b * twiddles[j * stride];
                *b = *a - t;
                *a += t;
            }
        }
        half *= 2;
    }

    let butterflies = (n as u64 / 2) * n.trailing_zeros() as u64;
    ops.mul(butterflies);
    ops.add(2 * butterflies);

    if direction == Direction::Inverse {
        let scale = 1.0 / n as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
        ops.mul(n as u64);
    }
    Ok(())
}

/// `e^{∓2 pi i j / n}` for `j < n/2`, sign by direction.
fn twiddle_table(n: usize, direction: Direction) -> Vec<C64> {
    let sign = match direction {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    (0..n / 2)
        .map(|j| C64::from_polar(1.0, sign * 2.0 * PI * j as f64 / n as f64))
        .collect()
}

fn bit_reverse_permute(buf: &mut [C64]) {
    let n = buf.len();
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            buf.swap(i, j);
        }
    }
}
