use crate::error::{Error, Result};

use super::rank::average_ranks;
use super::special::normal_sf;
use super::{check_finite, Exactness, Method, PairedSample, TestName, TestResult};

/// Largest number of nonzero differences for which the signed-rank null
/// distribution is computed exactly (2^20 sign vectors).
pub const SIGNED_RANK_EXACT_MAX_N: usize = 20;

/// Largest `C(n_x + n_y, n_x)` for which the rank-sum null distribution is exact.
pub const RANK_SUM_EXACT_MAX_LABELINGS: u128 = 1_000_000;

/// Two-sided p from lower/upper tail counts of a symmetric null distribution.
fn two_sided_from_counts(le: u64, ge: u64, total: u64) -> f64 {
    ((2 * le.min(ge)) as f64 / total as f64).min(1.0)
}

/// Normal tails with continuity correction for a statistic with the given null mean and sd.
/// Returns (two-sided, upper, lower).
fn normal_tails(stat: f64, mean: f64, sd: f64) -> (f64, f64, f64) {
    let diff = stat - mean;
    let two = 2.0 * normal_sf(((diff.abs() - 0.5).max(0.0)) / sd);
    let upper = normal_sf((diff - 0.5) / sd);
    let lower = normal_sf(-(diff + 0.5) / sd);
    (two, upper, lower)
}

/// Wilcoxon signed-rank test on `d_i = y_i - x_i`.
///
/// Zero differences are discarded; the reported statistic is `min(W+, W-)`.
/// Up to [`SIGNED_RANK_EXACT_MAX_N`] nonzero differences the null distribution
/// of `W+` over all sign vectors is counted exactly (midranks included),
/// otherwise a tie-corrected normal approximation with continuity correction
/// is used.
pub fn wilcoxon_signed_rank(pairs: &PairedSample) -> Result<TestResult> {
    wilcoxon_signed_rank_with(pairs, Exactness::Auto)
}

/// Largest `n` a forced exact signed-rank computation accepts (counts fit in u64).
const SIGNED_RANK_FORCED_MAX_N: usize = 62;

/// [`wilcoxon_signed_rank`] with an explicit choice of null distribution.
pub fn wilcoxon_signed_rank_with(pairs: &PairedSample, exactness: Exactness) -> Result<TestResult> {
    if pairs.is_empty() {
        return Err(Error::invalid("signed-rank test needs at least one pair"));
    }
    let diffs: Vec<f64> = pairs
        .differences()
        .into_iter()
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(TestResult::degenerate(
            TestName::Wsr,
            Method::Exact,
            0,
            "all differences are zero",
        ));
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, tie_term) = average_ranks(&magnitudes);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let statistic = w_plus.min(w_minus);

    let exact = match exactness {
        Exactness::Auto => n <= SIGNED_RANK_EXACT_MAX_N,
        Exactness::Exact if n > SIGNED_RANK_FORCED_MAX_N => {
            return Err(Error::invalid(format!(
                "exact signed-rank distribution limited to {SIGNED_RANK_FORCED_MAX_N} differences"
            )))
        }
        Exactness::Exact => true,
        Exactness::Normal => false,
    };
    let result = if exact {
        // midranks are multiples of 1/2, so doubled ranks are integers
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let max_sum: usize = doubled.iter().sum();
        let mut counts = vec![0u64; max_sum + 1];
        counts[0] = 1;
        let mut reach = 0;
        for &r in &doubled {
            for s in (0..=reach).rev() {
                if counts[s] > 0 {
                    counts[s + r] += counts[s];
                }
            }
            reach += r;
        }
        let observed = (2.0 * w_plus).round() as usize;
        let le: u64 = counts[..=observed].iter().sum();
        let ge: u64 = counts[observed..].iter().sum();
        let vectors = 1u64 << n;
        TestResult {
            test: TestName::Wsr,
            statistic,
            p_value: two_sided_from_counts(le, ge, vectors),
            p_greater: ge as f64 / vectors as f64,
            p_less: le as f64 / vectors as f64,
            n_effective: n,
            method: Method::Exact,
            degenerate: None,
        }
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
        let (two, upper, lower) = normal_tails(w_plus, mean, var.sqrt());
        TestResult {
            test: TestName::Wsr,
            statistic,
            p_value: two,
            p_greater: upper,
            p_less: lower,
            n_effective: n,
            method: Method::NormalApprox,
            degenerate: None,
        }
    };
    Ok(result.clamped())
}

fn choose(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
        if c > u64::MAX as u128 {
            return u128::MAX;
        }
    }
    c
}

/// Wilcoxon rank-sum (Mann-Whitney) test treating `x` and `y` as independent samples.
///
/// The statistic is `U` of `x`. Small tie-free problems use the exact null
/// distribution; otherwise a normal approximation with tie-corrected variance
/// and continuity correction.
pub fn wilcoxon_rank_sum(x: &[f64], y: &[f64]) -> Result<TestResult> {
    wilcoxon_rank_sum_with(x, y, Exactness::Auto)
}

/// [`wilcoxon_rank_sum`] with an explicit choice of null distribution.
/// Forcing the exact path requires tie-free data.
pub fn wilcoxon_rank_sum_with(x: &[f64], y: &[f64], exactness: Exactness) -> Result<TestResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::invalid("rank-sum test needs two non-empty samples"));
    }
    check_finite(x)?;
    check_finite(y)?;
    let (nx, ny) = (x.len(), y.len());
    let n = nx + ny;
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let (ranks, tie_term) = average_ranks(&pooled);
    let rank_sum_x: f64 = ranks[..nx].iter().sum();
    let u = rank_sum_x - (nx * (nx + 1)) as f64 / 2.0;
    let labelings = choose(n as u128, nx as u128);
    let exact = match exactness {
        Exactness::Auto => tie_term == 0.0 && labelings <= RANK_SUM_EXACT_MAX_LABELINGS,
        Exactness::Exact if tie_term != 0.0 || labelings > u64::MAX as u128 => {
            return Err(Error::invalid(
                "exact rank-sum distribution needs tie-free data and fewer than 2^64 labelings",
            ))
        }
        Exactness::Exact => true,
        Exactness::Normal => false,
    };

    let result = if exact {
        // counts[j][s]: subsets of size j of ranks seen so far with rank sum s
        let max_sum = n * (n + 1) / 2;
        let mut counts = vec![vec![0u64; max_sum + 1]; nx + 1];
        counts[0][0] = 1;
        for r in 1..=n {
            for j in (1..=nx.min(r)).rev() {
                let (lo, hi) = counts.split_at_mut(j);
                for s in (r..=max_sum).rev() {
                    hi[0][s] += lo[j - 1][s - r];
                }
            }
        }
        let offset = nx * (nx + 1) / 2;
        let dist = &counts[nx][offset..];
        let observed = u.round() as usize;
        let le: u64 = dist[..=observed].iter().sum();
        let ge: u64 = dist[observed..].iter().sum();
        let total: u64 = dist.iter().sum();
        TestResult {
            test: TestName::Wrs,
            statistic: u,
            p_value: two_sided_from_counts(le, ge, total),
            p_greater: le as f64 / total as f64,
            p_less: ge as f64 / total as f64,
            n_effective: n,
            method: Method::Exact,
            degenerate: None,
        }
    } else {
        let (nxf, nyf, nf) = (nx as f64, ny as f64, n as f64);
        let mean = nxf * nyf / 2.0;
        let var = nxf * nyf / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
        if var <= 0.0 {
            let mut r = TestResult::degenerate(
                TestName::Wrs,
                Method::NormalApprox,
                n,
                "all observations are tied",
            );
            r.statistic = u;
            return Ok(r);
        }
        let (two, upper, lower) = normal_tails(u, mean, var.sqrt());
        // small U of x means y tends larger
        TestResult {
            test: TestName::Wrs,
            statistic: u,
            p_value: two,
            p_greater: lower,
            p_less: upper,
            n_effective: n,
            method: Method::NormalApprox,
            degenerate: None,
        }
    };
    Ok(result.clamped())
}
