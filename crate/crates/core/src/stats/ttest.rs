use crate::error::{Error, Result};

use super::special::{student_t_sf, student_t_two_sided};
use super::{Method, PairedSample, TestName, TestResult};

/// Paired Student's t-test on `d_i = y_i - x_i` with `n - 1` degrees of freedom.
///
/// Zero-variance differences are degenerate: p = 1 when the mean is zero, 0 otherwise.
pub fn paired_t_test(pairs: &PairedSample) -> Result<TestResult> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::invalid("paired t-test needs at least two pairs"));
    }
    let d = pairs.differences();
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;

    let (lo, hi) = d
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo == hi {
        let (statistic, p_value, p_greater, p_less, reason) = if mean == 0.0 {
            (0.0, 1.0, 1.0, 1.0, "all differences are zero")
        } else if mean > 0.0 {
            (f64::INFINITY, 0.0, 0.0, 1.0, "zero variance with nonzero mean")
        } else {
            (f64::NEG_INFINITY, 0.0, 1.0, 0.0, "zero variance with nonzero mean")
        };
        return Ok(TestResult {
            test: TestName::PairedT,
            statistic,
            p_value,
            p_greater,
            p_less,
            n_effective: n,
            method: Method::Analytic,
            degenerate: Some(reason.to_string()),
        });
    }

    let ss: f64 = d.iter().map(|v| (v - mean) * (v - mean)).sum();
    let sd = (ss / (nf - 1.0)).sqrt();
    let t = mean / (sd / nf.sqrt());
    let df = nf - 1.0;
    Ok(TestResult {
        test: TestName::PairedT,
        statistic: t,
        p_value: student_t_two_sided(t, df),
        p_greater: student_t_sf(t, df),
        p_less: student_t_sf(-t, df),
        n_effective: n,
        method: Method::Analytic,
        degenerate: None,
    }
    .clamped())
}
