//! Monte Carlo null calibration of the paired tests.
//!
//! Each trial swaps every `(x_i, y_i)` pair with probability 1/2, which makes the
//! null hypothesis of no difference true by construction, then counts how often
//! the paired tests reject at `alpha`. Trial `i` draws from its own ChaCha
//! stream, so results do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{paired_t_test, wilcoxon_signed_rank, PairedSample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullCalibration {
    pub trials: usize,
    pub alpha: f64,
    pub wsr_rejection_rate: f64,
    pub t_rejection_rate: f64,
}

/// A copy of `pairs` with each pair swapped on a fair coin flip.
pub fn random_label_swap<R: Rng>(pairs: &PairedSample, rng: &mut R) -> PairedSample {
    let (x, y) = pairs
        .x()
        .iter()
        .zip(pairs.y())
        .map(|(&a, &b)| if rng.random::<bool>() { (b, a) } else { (a, b) })
        .unzip();
    PairedSample::new(x, y).expect("swapping preserves validity")
}

pub fn null_rejection_rates(
    pairs: &PairedSample,
    trials: usize,
    alpha: f64,
    seed: u64,
) -> Result<NullCalibration> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha must lie in (0, 1)"));
    }
    if pairs.len() < 2 {
        return Err(Error::invalid("calibration needs at least two pairs"));
    }
    let (wsr, t) = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<(usize, usize)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let swapped = random_label_swap(pairs, &mut rng);
            let w = wilcoxon_signed_rank(&swapped)?.p_value < alpha;
            let t = paired_t_test(&swapped)?.p_value < alpha;
            Ok((usize::from(w), usize::from(t)))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    Ok(NullCalibration {
        trials,
        alpha,
        wsr_rejection_rate: wsr as f64 / trials as f64,
        t_rejection_rate: t as f64 / trials as f64,
    })
}
