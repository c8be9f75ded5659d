//! SOTA decision rules over a decomposed comparison.
//!
//! Two facets are judged separately: case (2), who answers more of the
//! discordant queries (exact sign test), and case (3), who ranks the relevant
//! document higher when both answer (ESL or RR, signed-rank test by default).
//!
//! * **Strict**: a side is significantly better when it wins both facets significantly.
//! * **Hippocratic**: a side is significantly better when it wins one facet
//!   significantly without being significantly worse on the other.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decompose::Decomposition;
use crate::error::{Error, Result};
use crate::stats::{Alternative, TestName, TestResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictMetric {
    Esl,
    Rr,
}

impl FromStr for VerdictMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "esl" => Ok(VerdictMetric::Esl),
            "rr" => Ok(VerdictMetric::Rr),
            other => Err(Error::invalid(format!("unknown metric {other:?}"))),
        }
    }
}

impl fmt::Display for VerdictMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictMetric::Esl => "ESL",
            VerdictMetric::Rr => "RR",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictRule {
    Strict,
    Hippocratic,
}

impl FromStr for VerdictRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(VerdictRule::Strict),
            "hippocratic" => Ok(VerdictRule::Hippocratic),
            other => Err(Error::invalid(format!("unknown rule {other:?}"))),
        }
    }
}

impl fmt::Display for VerdictRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictRule::Strict => "strict",
            VerdictRule::Hippocratic => "hippocratic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    BSignificantlyBetter,
    ASignificantlyBetter,
    Inconclusive,
}

impl Outcome {
    pub fn mirrored(self) -> Self {
        match self {
            Outcome::BSignificantlyBetter => Outcome::ASignificantlyBetter,
            Outcome::ASignificantlyBetter => Outcome::BSignificantlyBetter,
            Outcome::Inconclusive => Outcome::Inconclusive,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::BSignificantlyBetter => "B significantly better",
            Outcome::ASignificantlyBetter => "A significantly better",
            Outcome::Inconclusive => "inconclusive",
        })
    }
}

/// Case-3 test that gates the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateTest {
    #[default]
    Wsr,
    PairedT,
}

impl FromStr for GateTest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wsr" => Ok(GateTest::Wsr),
            "t" | "t-test" | "paired-t" => Ok(GateTest::PairedT),
            other => Err(Error::invalid(format!("unknown gating test {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    /// Two-sided p-value plus the direction of the observed effect.
    #[default]
    TwoSided,
    /// The one-sided tail in the direction of the side being credited.
    OneSided,
}

impl FromStr for Sidedness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two" | "two-sided" => Ok(Sidedness::TwoSided),
            "one" | "one-sided" => Ok(Sidedness::OneSided),
            other => Err(Error::invalid(format!("unknown sidedness {other:?}"))),
        }
    }
}

/// Significance settings shared by every criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gating {
    pub alpha: f64,
    pub gate: GateTest,
    /// Gate on Bonferroni-adjusted p-values for a family of this size.
    pub bonferroni_m: Option<usize>,
    pub sidedness: Sidedness,
}

impl Default for Gating {
    fn default() -> Self {
        Gating {
            alpha: 0.05,
            gate: GateTest::Wsr,
            bonferroni_m: None,
            sidedness: Sidedness::TwoSided,
        }
    }
}

impl Gating {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if self.bonferroni_m == Some(0) {
            return Err(Error::invalid("family size m must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonStats {
    pub decomposition: Decomposition,
    pub case2_binomial: TestResult,
    pub case3_esl_wsr: TestResult,
    pub case3_esl_t: TestResult,
    pub case3_rr_wsr: TestResult,
    pub case3_rr_t: TestResult,
    /// Means over case 3; `None` when no query is answered by both runs.
    pub mean_esl_a: Option<f64>,
    pub mean_esl_b: Option<f64>,
    pub mean_rr_a: Option<f64>,
    pub mean_rr_b: Option<f64>,
    pub gating: Gating,
}

fn mirror_test(t: &TestResult) -> TestResult {
    let mut m = t.mirrored();
    match t.test {
        TestName::PairedT => m.statistic = -t.statistic,
        TestName::Binomial if t.degenerate.is_none() => {
            m.statistic = t.n_effective as f64 - t.statistic
        }
        _ => {}
    }
    m
}

impl ComparisonStats {
    /// The same comparison with runs A and B exchanged.
    pub fn mirrored(&self) -> Self {
        ComparisonStats {
            decomposition: self.decomposition.mirrored(),
            case2_binomial: mirror_test(&self.case2_binomial),
            case3_esl_wsr: mirror_test(&self.case3_esl_wsr),
            case3_esl_t: mirror_test(&self.case3_esl_t),
            case3_rr_wsr: mirror_test(&self.case3_rr_wsr),
            case3_rr_t: mirror_test(&self.case3_rr_t),
            mean_esl_a: self.mean_esl_b,
            mean_esl_b: self.mean_esl_a,
            mean_rr_a: self.mean_rr_b,
            mean_rr_b: self.mean_rr_a,
            gating: self.gating,
        }
    }

    pub fn case3_test(&self, metric: VerdictMetric) -> &TestResult {
        match (metric, self.gating.gate) {
            (VerdictMetric::Esl, GateTest::Wsr) => &self.case3_esl_wsr,
            (VerdictMetric::Esl, GateTest::PairedT) => &self.case3_esl_t,
            (VerdictMetric::Rr, GateTest::Wsr) => &self.case3_rr_wsr,
            (VerdictMetric::Rr, GateTest::PairedT) => &self.case3_rr_t,
        }
    }

    /// p-value used when crediting `side`, after the configured sidedness and correction.
    fn gated_p(&self, test: &TestResult, side_tail: Alternative) -> f64 {
        let raw = match self.gating.sidedness {
            Sidedness::TwoSided => test.p_value,
            Sidedness::OneSided => test.p(side_tail),
        };
        match self.gating.bonferroni_m {
            Some(m) => (raw * m as f64).min(1.0),
            None => raw,
        }
    }

    /// Evaluates the four directional criteria.
    pub fn criteria(&self, metric: VerdictMetric) -> Criteria {
        let d = &self.decomposition;
        let alpha = self.gating.alpha;

        let bin = &self.case2_binomial;
        let p2b = self.gated_p(bin, Alternative::Greater);
        let p2a = self.gated_p(bin, Alternative::Less);
        let case2_b = Criterion {
            name: "case 2 favors B".into(),
            satisfied: d.b_wins.len() > d.a_wins.len() && p2b < alpha,
            p_value: p2b,
        };
        let case2_a = Criterion {
            name: "case 2 favors A".into(),
            satisfied: d.a_wins.len() > d.b_wins.len() && p2a < alpha,
            p_value: p2a,
        };

        let test = self.case3_test(metric);
        // tests run on (x = A, y = B); lower ESL and higher RR are better
        let (b_tail, a_tail, b_ahead, a_ahead) = match metric {
            VerdictMetric::Esl => (
                Alternative::Less,
                Alternative::Greater,
                lt(self.mean_esl_b, self.mean_esl_a),
                lt(self.mean_esl_a, self.mean_esl_b),
            ),
            VerdictMetric::Rr => (
                Alternative::Greater,
                Alternative::Less,
                lt(self.mean_rr_a, self.mean_rr_b),
                lt(self.mean_rr_b, self.mean_rr_a),
            ),
        };
        let p3b = self.gated_p(test, b_tail);
        let p3a = self.gated_p(test, a_tail);
        let case3_b = Criterion {
            name: format!("case 3 {metric} favors B"),
            satisfied: b_ahead && p3b < alpha,
            p_value: p3b,
        };
        let case3_a = Criterion {
            name: format!("case 3 {metric} favors A"),
            satisfied: a_ahead && p3a < alpha,
            p_value: p3a,
        };
        Criteria {
            case2_b,
            case2_a,
            case3_b,
            case3_a,
        }
    }
}

fn lt(a: Option<f64>, b: Option<f64>) -> bool {
    matches!((a, b), (Some(a), Some(b)) if a < b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub satisfied: bool,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criteria {
    pub case2_b: Criterion,
    pub case2_a: Criterion,
    pub case3_b: Criterion,
    pub case3_a: Criterion,
}

impl Criteria {
    fn into_vec(self) -> Vec<Criterion> {
        vec![self.case2_b, self.case2_a, self.case3_b, self.case3_a]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub rule: VerdictRule,
    pub metric: VerdictMetric,
    pub outcome: Outcome,
    pub rationale: Vec<Criterion>,
    pub degenerate: Option<String>,
}

fn decide(s: &ComparisonStats, metric: VerdictMetric, rule: VerdictRule) -> Verdict {
    let c = s.criteria(metric);
    if s.decomposition.case3.is_empty() {
        return Verdict {
            rule,
            metric,
            outcome: Outcome::Inconclusive,
            rationale: c.into_vec(),
            degenerate: Some("no query is answered by both runs".into()),
        };
    }
    let (c2b, c2a, c3b, c3a) = (
        c.case2_b.satisfied,
        c.case2_a.satisfied,
        c.case3_b.satisfied,
        c.case3_a.satisfied,
    );
    let (b, a) = match rule {
        VerdictRule::Strict => (c2b && c3b, c2a && c3a),
        VerdictRule::Hippocratic => (
            (c2b && !c3a) || (c3b && !c2a),
            (c2a && !c3b) || (c3a && !c2b),
        ),
    };
    let outcome = match (b, a) {
        (true, false) => Outcome::BSignificantlyBetter,
        (false, true) => Outcome::ASignificantlyBetter,
        _ => Outcome::Inconclusive,
    };
    Verdict {
        rule,
        metric,
        outcome,
        rationale: c.into_vec(),
        degenerate: None,
    }
}

/// Better on both facets, both significantly.
pub fn strict_verdict(s: &ComparisonStats, metric: VerdictMetric) -> Verdict {
    decide(s, metric, VerdictRule::Strict)
}

/// Significantly better on one facet without being significantly worse on the other.
pub fn hippocratic_verdict(s: &ComparisonStats, metric: VerdictMetric) -> Verdict {
    decide(s, metric, VerdictRule::Hippocratic)
}

pub fn verdict(s: &ComparisonStats, metric: VerdictMetric, rule: VerdictRule) -> Verdict {
    decide(s, metric, rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Method;

    fn test_result(name: TestName, p: f64, favor_b_tail: Alternative) -> TestResult {
        let (p_greater, p_less) = match favor_b_tail {
            Alternative::Greater => (p / 2.0, 1.0 - p / 2.0),
            Alternative::Less => (1.0 - p / 2.0, p / 2.0),
            Alternative::TwoSided => (1.0, 1.0),
        };
        TestResult {
            test: name,
            statistic: 0.0,
            p_value: p,
            p_greater,
            p_less,
            n_effective: 100,
            method: Method::NormalApprox,
            degenerate: None,
        }
    }

    fn ids(prefix: &str, n: usize) -> std::collections::BTreeSet<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    /// `b_tail` gives the direction of case-3 ESL tests (Less = B has lower ESL).
    fn stats(
        a_wins: usize,
        b_wins: usize,
        p_bin: f64,
        esl_a: f64,
        esl_b: f64,
        p_esl: f64,
    ) -> ComparisonStats {
        let decomposition = Decomposition {
            case1: ids("n", 3),
            a_wins: ids("a", a_wins),
            b_wins: ids("b", b_wins),
            case3: ids("c", 10),
            a_better: ids("c", 5),
            b_better: Default::default(),
            tied: Default::default(),
        };
        let bin_tail = if b_wins >= a_wins { Alternative::Greater } else { Alternative::Less };
        let esl_tail = if esl_b <= esl_a { Alternative::Less } else { Alternative::Greater };
        let rr_tail = if esl_b <= esl_a { Alternative::Greater } else { Alternative::Less };
        ComparisonStats {
            decomposition,
            case2_binomial: test_result(TestName::Binomial, p_bin, bin_tail),
            case3_esl_wsr: test_result(TestName::Wsr, p_esl, esl_tail),
            case3_esl_t: test_result(TestName::PairedT, p_esl, esl_tail),
            case3_rr_wsr: test_result(TestName::Wsr, p_esl, rr_tail),
            case3_rr_t: test_result(TestName::PairedT, p_esl, rr_tail),
            mean_esl_a: Some(esl_a),
            mean_esl_b: Some(esl_b),
            mean_rr_a: Some(1.0 / esl_a),
            mean_rr_b: Some(1.0 / esl_b),
            gating: Gating::default(),
        }
    }

    #[test]
    fn strict_both_facets() {
        let s = stats(300, 500, 1e-10, 7.15, 5.15, 2.03e-16);
        assert_eq!(strict_verdict(&s, VerdictMetric::Esl).outcome, Outcome::BSignificantlyBetter);
        assert_eq!(
            strict_verdict(&s.mirrored(), VerdictMetric::Esl).outcome,
            Outcome::ASignificantlyBetter
        );
    }

    #[test]
    fn strict_conflict_is_inconclusive() {
        let s = stats(300, 500, 1e-10, 5.0, 7.0, 1e-6);
        assert_eq!(strict_verdict(&s, VerdictMetric::Esl).outcome, Outcome::Inconclusive);
        assert_eq!(hippocratic_verdict(&s, VerdictMetric::Esl).outcome, Outcome::Inconclusive);
    }

    #[test]
    fn hippocratic_single_facet() {
        let case2_only = stats(300, 500, 1e-10, 7.13, 7.27, 0.609428);
        assert_eq!(strict_verdict(&case2_only, VerdictMetric::Esl).outcome, Outcome::Inconclusive);
        assert_eq!(
            hippocratic_verdict(&case2_only, VerdictMetric::Esl).outcome,
            Outcome::BSignificantlyBetter
        );
        let case3_only = stats(400, 400, 1.0, 7.06, 5.71, 7.94e-8);
        assert_eq!(
            hippocratic_verdict(&case3_only, VerdictMetric::Esl).outcome,
            Outcome::BSignificantlyBetter
        );
    }

    #[test]
    fn identical_runs_are_inconclusive() {
        let mut s = stats(0, 0, 1.0, 5.0, 5.0, 1.0);
        s.case2_binomial = TestResult::degenerate(TestName::Binomial, Method::Exact, 0, "none");
        for rule in [VerdictRule::Strict, VerdictRule::Hippocratic] {
            assert_eq!(verdict(&s, VerdictMetric::Esl, rule).outcome, Outcome::Inconclusive);
        }
    }

    #[test]
    fn empty_case3_is_degenerate() {
        let mut s = stats(0, 50, 1e-9, 5.0, 4.0, 0.001);
        s.decomposition.case3.clear();
        let v = hippocratic_verdict(&s, VerdictMetric::Rr);
        assert_eq!(v.outcome, Outcome::Inconclusive);
        assert!(v.degenerate.is_some());
    }

    #[test]
    fn bonferroni_gating() {
        let mut s = stats(300, 500, 0.01, 7.0, 7.0, 0.5);
        assert_eq!(hippocratic_verdict(&s, VerdictMetric::Esl).outcome, Outcome::BSignificantlyBetter);
        s.gating.bonferroni_m = Some(9);
        assert_eq!(hippocratic_verdict(&s, VerdictMetric::Esl).outcome, Outcome::Inconclusive);
    }

    #[test]
    fn one_sided_uses_the_crediting_tail() {
        let mut s = stats(300, 500, 0.08, 7.0, 7.0, 0.5);
        assert_eq!(hippocratic_verdict(&s, VerdictMetric::Esl).outcome, Outcome::Inconclusive);
        s.gating.sidedness = Sidedness::OneSided;
        assert_eq!(hippocratic_verdict(&s, VerdictMetric::Esl).outcome, Outcome::BSignificantlyBetter);
    }

    #[test]
    fn gating_validation() {
        assert!(Gating { alpha: 0.0, ..Gating::default() }.validate().is_err());
        assert!(Gating { bonferroni_m: Some(0), ..Gating::default() }.validate().is_err());
        assert!(Gating::default().validate().is_ok());
    }
}
