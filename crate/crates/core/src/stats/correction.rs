use crate::error::{Error, Result};

/// Bonferroni adjustment for a family of `m` hypotheses: `min(1, m * p)`.
///
/// `m` may exceed the number of p-values supplied.
pub fn bonferroni(p_values: &[f64], m: usize) -> Result<Vec<f64>> {
    if m < 1 {
        return Err(Error::invalid("family size m must be at least 1"));
    }
    p_values
        .iter()
        .map(|&p| {
            if (0.0..=1.0).contains(&p) {
                Ok((m as f64 * p).min(1.0))
            } else {
                Err(Error::invalid(format!("p-value {p} outside [0, 1]")))
            }
        })
        .collect()
}
