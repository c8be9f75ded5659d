use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Method, TestName, TestResult};

/// Two-sided convention for the exact binomial test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinomialTwoSided {
    /// Sum of all outcomes no more likely than the observed one.
    #[default]
    MinLike,
    /// Twice the smaller tail, capped at 1.
    DoubleTail,
}

/// Relative slack when comparing outcome probabilities.
const MINLIKE_RELATIVE_TOLERANCE: f64 = 1e-7;

/// Binomial(n, 1/2) probabilities, built outward from the mode by ratio
/// recurrence so that large `n` neither underflows nor loses precision.
fn half_binomial_pmf(n: u64) -> Vec<f64> {
    let n_us = n as usize;
    let mode = n_us / 2;
    let mut w = vec![0.0; n_us + 1];
    w[mode] = 1.0;
    for i in mode..n_us {
        w[i + 1] = w[i] * (n - i as u64) as f64 / (i + 1) as f64;
    }
    for i in (1..=mode).rev() {
        w[i - 1] = w[i] * i as f64 / (n - i as u64 + 1) as f64;
    }
    // add smallest terms first: tails inward
    let total = sum_ascending(&w);
    w.iter().map(|v| v / total).collect()
}

/// Sums values that grow from both ends toward the middle, smallest first.
fn sum_ascending(w: &[f64]) -> f64 {
    let (mut lo, mut hi) = (0usize, w.len());
    let mut acc = 0.0;
    while lo < hi {
        if w[lo] <= w[hi - 1] {
            acc += w[lo];
            lo += 1;
        } else {
            acc += w[hi - 1];
            hi -= 1;
        }
    }
    acc
}

/// Exact sign test: are `b_wins` out of `n_discordant` consistent with a fair coin?
///
/// `p_greater` is small when B wins more often than chance.
pub fn binomial_sign_test(b_wins: u64, n_discordant: u64) -> Result<TestResult> {
    binomial_sign_test_with(b_wins, n_discordant, BinomialTwoSided::MinLike)
}

pub fn binomial_sign_test_with(
    b_wins: u64,
    n_discordant: u64,
    convention: BinomialTwoSided,
) -> Result<TestResult> {
    if b_wins > n_discordant {
        return Err(Error::invalid(format!(
            "wins ({b_wins}) exceed discordant count ({n_discordant})"
        )));
    }
    if n_discordant == 0 {
        return Ok(TestResult::degenerate(
            TestName::Binomial,
            Method::Exact,
            0,
            "no discordant queries",
        ));
    }
    let pmf = half_binomial_pmf(n_discordant);
    let k = b_wins as usize;
    let p_less: f64 = pmf[..=k].iter().sum();
    let p_greater: f64 = pmf[k..].iter().rev().sum();
    let p_value = match convention {
        BinomialTwoSided::MinLike => {
            let limit = pmf[k] * (1.0 + MINLIKE_RELATIVE_TOLERANCE);
            let mut in_region: Vec<f64> = pmf.iter().copied().filter(|&p| p <= limit).collect();
            in_region.sort_by(f64::total_cmp);
            in_region.iter().sum::<f64>()
        }
        BinomialTwoSided::DoubleTail => 2.0 * p_less.min(p_greater),
    };
    Ok(TestResult {
        test: TestName::Binomial,
        statistic: b_wins as f64,
        p_value,
        p_greater,
        p_less,
        n_effective: n_discordant as usize,
        method: Method::Exact,
        degenerate: None,
    }
    .clamped())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_outcome() {
        assert_eq!(binomial_sign_test(5, 10).unwrap().p_value, 1.0);
    }

    #[test]
    fn all_wins() {
        let r = binomial_sign_test(10, 10).unwrap();
        assert!((r.p_value - 2.0 / 1024.0).abs() < 1e-15);
        assert!((r.p_greater - 1.0 / 1024.0).abs() < 1e-15);
        assert_eq!(r.p_less, 1.0);
    }

    #[test]
    fn degenerate_and_errors() {
        let r = binomial_sign_test(0, 0).unwrap();
        assert!(r.is_degenerate());
        assert_eq!(r.p_value, 1.0);
        assert!(binomial_sign_test(3, 2).is_err());
    }

    #[test]
    fn conventions_agree_for_fair_coin() {
        for n in [1u64, 2, 7, 30, 301] {
            for k in 0..=n {
                let a = binomial_sign_test_with(k, n, BinomialTwoSided::MinLike).unwrap();
                let b = binomial_sign_test_with(k, n, BinomialTwoSided::DoubleTail).unwrap();
                assert!((a.p_value - b.p_value).abs() < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn large_n_does_not_underflow() {
        let r = binomial_sign_test(3000, 5793).unwrap();
        assert!(r.p_value > 0.0 && r.p_value < 1.0);
        let total: f64 = half_binomial_pmf(100_000).iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
