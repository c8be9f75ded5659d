//! Significance tests: Wilcoxon rank-sum, Wilcoxon signed-rank, paired t,
//! exact binomial sign test, and Bonferroni correction.
//!
//! Every test reports a two-sided p-value plus both one-sided tails. One-sided
//! tails are oriented so that `p_greater` is small when the second sample
//! (`y`, run B) tends to be larger.

mod binomial;
pub mod calibration;
mod correction;
mod rank;
pub mod special;
mod ttest;
mod wilcoxon;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use binomial::{binomial_sign_test, binomial_sign_test_with, BinomialTwoSided};
pub use correction::bonferroni;
pub use rank::average_ranks;
pub use ttest::paired_t_test;
pub use wilcoxon::{
    wilcoxon_rank_sum, wilcoxon_rank_sum_with, wilcoxon_signed_rank, wilcoxon_signed_rank_with,
    RANK_SUM_EXACT_MAX_LABELINGS, SIGNED_RANK_EXACT_MAX_N,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestName {
    #[serde(rename = "WRS")]
    Wrs,
    #[serde(rename = "WSR")]
    Wsr,
    #[serde(rename = "PairedT")]
    PairedT,
    #[serde(rename = "Binomial")]
    Binomial,
}

impl fmt::Display for TestName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestName::Wrs => "WRS",
            TestName::Wsr => "WSR",
            TestName::PairedT => "t-test",
            TestName::Binomial => "binomial",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Exact,
    NormalApprox,
    Analytic,
}

/// Null distribution used by the rank tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    /// Exact when small enough (and tie-free for rank-sum), normal otherwise.
    #[default]
    Auto,
    Exact,
    Normal,
}

/// Which tail a p-value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// The second sample (run B side) is larger.
    Greater,
    Less,
}

impl FromStr for Alternative {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-sided" | "two" => Ok(Alternative::TwoSided),
            "greater" => Ok(Alternative::Greater),
            "less" => Ok(Alternative::Less),
            other => Err(Error::invalid(format!("unknown alternative {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test: TestName,
    #[serde(with = "nonfinite")]
    pub statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub p_greater: f64,
    pub p_less: f64,
    /// Samples actually used, e.g. after dropping zero differences.
    pub n_effective: usize,
    pub method: Method,
    /// Set when the data carry no information for the test.
    pub degenerate: Option<String>,
}

impl TestResult {
    pub fn p(&self, alternative: Alternative) -> f64 {
        match alternative {
            Alternative::TwoSided => self.p_value,
            Alternative::Greater => self.p_greater,
            Alternative::Less => self.p_less,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate.is_some()
    }

    /// Result for a test that cannot be run on the available data.
    pub fn degenerate(test: TestName, method: Method, n_effective: usize, reason: &str) -> Self {
        TestResult {
            test,
            statistic: 0.0,
            p_value: 1.0,
            p_greater: 1.0,
            p_less: 1.0,
            n_effective,
            method,
            degenerate: Some(reason.to_string()),
        }
    }

    /// The same test seen with its two samples exchanged.
    pub fn mirrored(&self) -> Self {
        TestResult {
            p_greater: self.p_less,
            p_less: self.p_greater,
            ..self.clone()
        }
    }

    fn clamped(mut self) -> Self {
        self.p_value = clamp_p(self.p_value);
        self.p_greater = clamp_p(self.p_greater);
        self.p_less = clamp_p(self.p_less);
        self
    }
}

pub(crate) fn clamp_p(p: f64) -> f64 {
    if p.is_nan() {
        1.0
    } else {
        p.clamp(0.0, 1.0)
    }
}

/// Per-query value pairs `(x_i, y_i)` over a query subset.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PairedSample {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PairedSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::invalid(format!(
                "paired samples differ in length: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        check_finite(&x)?;
        check_finite(&y)?;
        Ok(PairedSample { x, y })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let (x, y) = pairs.into_iter().unzip();
        Self::new(x, y)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Differences `y_i - x_i`.
    pub fn differences(&self) -> Vec<f64> {
        self.x.iter().zip(&self.y).map(|(x, y)| y - x).collect()
    }

    pub fn swapped(&self) -> Self {
        PairedSample {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid("sample contains a non-finite value"))
    }
}

/// JSON cannot carry infinities; they travel as strings.
mod nonfinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad number {other:?}"))),
            },
        }
    }
}
