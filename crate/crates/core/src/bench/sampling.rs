use rand::Rng;

use crate::{Error, Result, SupportSet};

/// Draw `J` from the model where each frequency joins independently with
/// probability `k / n`. Empty draws are redrawn.
pub fn sample_support<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<SupportSet> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 0 < k <= N, got k = {k}, N = {n}")));
    }
    let p = k as f64 / n as f64;
    loop {
        let indices: Vec<usize> = (0..n).filter(|_| rng.random::<f64>() < p).collect();
        if !indices.is_empty() {
            return SupportSet::new(indices, n);
        }
        log::debug!("empty support drawn for k = {k}, N = {n}; redrawing");
    }
}
