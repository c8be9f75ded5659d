//! End-to-end comparison of two runs: score, decompose, test, decide.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decompose::{breakdown_percentages, decompose, Breakdown, Decomposition};
use crate::error::{Error, Result};
use crate::ingest::{align, IngestDiagnostics, Qrels, Run, DEFAULT_K};
use crate::metrics::{mean_esl, mean_rr, score_run, ScoreTable};
use crate::stats::{
    binomial_sign_test, bonferroni, paired_t_test, wilcoxon_rank_sum, wilcoxon_signed_rank,
    Method, PairedSample, TestName, TestResult,
};
use crate::verdict::{verdict, ComparisonStats, Gating, Verdict, VerdictMetric, VerdictRule};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub k: usize,
    pub gating: Gating,
    /// Bonferroni family size used for the adjusted p-values in the report.
    pub family_size: usize,
    /// Rule and metric of the headline verdict.
    pub rule: VerdictRule,
    pub metric: VerdictMetric,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            k: DEFAULT_K,
            gating: Gating::default(),
            family_size: 1,
            rule: VerdictRule::Hippocratic,
            metric: VerdictMetric::Esl,
        }
    }
}

impl CompareConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("cutoff k must be at least 1"));
        }
        if self.family_size == 0 {
            return Err(Error::invalid("family size m must be at least 1"));
        }
        self.gating.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveTests {
    pub wrs: TestResult,
    pub wsr: TestResult,
    pub t: TestResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseCounts {
    pub neither: usize,
    pub a_wins: usize,
    pub b_wins: usize,
    pub both: usize,
    pub a_better: usize,
    pub b_better: usize,
    pub tied: usize,
}

impl From<&Decomposition> for CaseCounts {
    fn from(d: &Decomposition) -> Self {
        CaseCounts {
            neither: d.case1.len(),
            a_wins: d.a_wins.len(),
            b_wins: d.b_wins.len(),
            both: d.case3.len(),
            a_better: d.a_better.len(),
            b_better: d.b_better.len(),
            tied: d.tied.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub counts: CaseCounts,
    pub fractions: Breakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case3Report {
    pub mean_esl_a: Option<f64>,
    pub mean_esl_b: Option<f64>,
    pub mean_rr_a: Option<f64>,
    pub mean_rr_b: Option<f64>,
    pub esl_wsr: TestResult,
    pub esl_t: TestResult,
    pub rr_wsr: TestResult,
    pub rr_t: TestResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjustedP {
    pub raw: f64,
    pub adjusted: f64,
}

/// Everything a comparison reports, naive and decomposed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema_version: String,
    pub run_a: String,
    pub run_b: String,
    pub k: usize,
    pub queries: usize,
    pub mrr_a: f64,
    pub mrr_b: f64,
    /// `MRR(B) - MRR(A)` over the full universe.
    pub delta_mrr: f64,
    pub naive: NaiveTests,
    pub breakdown: BreakdownReport,
    pub case2: TestResult,
    pub case3: Case3Report,
    pub gating: Gating,
    pub rule: VerdictRule,
    pub metric: VerdictMetric,
    /// Strict and Hippocratic under ESL and RR.
    pub verdicts: Vec<Verdict>,
    pub family_size: usize,
    pub p_values: BTreeMap<String, AdjustedP>,
}

impl ComparisonReport {
    /// The verdict for the configured rule and metric.
    pub fn headline(&self) -> &Verdict {
        self.verdict(self.rule, self.metric)
            .expect("every rule/metric pair is evaluated")
    }

    pub fn verdict(&self, rule: VerdictRule, metric: VerdictMetric) -> Option<&Verdict> {
        self.verdicts
            .iter()
            .find(|v| v.rule == rule && v.metric == metric)
    }

    pub fn to_json(&self) -> String {
        crate::report::render_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A finished comparison with the intermediate tables kept for per-query output.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub report: ComparisonReport,
    pub stats: ComparisonStats,
    pub table_a: ScoreTable,
    pub table_b: ScoreTable,
    pub diagnostics: IngestDiagnostics,
}

fn or_degenerate(test: TestName, method: Method, n: usize, r: Result<TestResult>) -> TestResult {
    r.unwrap_or_else(|_| TestResult::degenerate(test, method, n, "not enough queries"))
}

fn paired_over<'a>(
    a: &ScoreTable,
    b: &ScoreTable,
    queries: impl IntoIterator<Item = &'a str>,
    value: impl Fn(&crate::metrics::PerQueryScore) -> f64,
) -> Result<PairedSample> {
    let pairs = queries
        .into_iter()
        .map(|q| Ok((value(a.get(q)?), value(b.get(q)?))))
        .collect::<Result<Vec<_>>>()?;
    PairedSample::from_pairs(pairs)
}

fn paired_tests(pairs: &PairedSample) -> (TestResult, TestResult) {
    let n = pairs.len();
    (
        or_degenerate(TestName::Wsr, Method::Exact, 0, wilcoxon_signed_rank(pairs)),
        or_degenerate(TestName::PairedT, Method::Analytic, n, paired_t_test(pairs)),
    )
}

/// Compares two score tables over their shared universe.
pub fn compare_tables(
    table_a: &ScoreTable,
    table_b: &ScoreTable,
    config: &CompareConfig,
) -> Result<(ComparisonReport, ComparisonStats)> {
    config.validate()?;
    let decomposition = decompose(table_a, table_b)?;
    let fractions = breakdown_percentages(&decomposition)?;
    let universe: Vec<&str> = table_a.universe().collect();

    let mrr_a = mean_rr(table_a, universe.iter().copied())?;
    let mrr_b = mean_rr(table_b, universe.iter().copied())?;

    let rr_all = paired_over(table_a, table_b, universe.iter().copied(), |s| s.rr)?;
    let (naive_wsr, naive_t) = paired_tests(&rr_all);
    let naive = NaiveTests {
        wrs: wilcoxon_rank_sum(rr_all.x(), rr_all.y())?,
        wsr: naive_wsr,
        t: naive_t,
    };

    let case3 = &decomposition.case3;
    let case3_ids = || case3.iter().map(String::as_str);
    let esl_value = |s: &crate::metrics::PerQueryScore| s.esl.map_or(f64::NAN, f64::from);
    let esl_pairs = paired_over(table_a, table_b, case3_ids(), esl_value)?;
    let rr_pairs = paired_over(table_a, table_b, case3_ids(), |s| s.rr)?;
    let (esl_wsr, esl_t) = paired_tests(&esl_pairs);
    let (rr_wsr, rr_t) = paired_tests(&rr_pairs);
    let mean_or_none = |r: Result<f64>| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::EmptySubset) => Ok(None),
        Err(e) => Err(e),
    };

    let case2 = binomial_sign_test(
        decomposition.b_wins.len() as u64,
        decomposition.discordant() as u64,
    )?;

    let stats = ComparisonStats {
        case2_binomial: case2.clone(),
        case3_esl_wsr: esl_wsr.clone(),
        case3_esl_t: esl_t.clone(),
        case3_rr_wsr: rr_wsr.clone(),
        case3_rr_t: rr_t.clone(),
        mean_esl_a: mean_or_none(mean_esl(table_a, case3_ids()))?,
        mean_esl_b: mean_or_none(mean_esl(table_b, case3_ids()))?,
        mean_rr_a: mean_or_none(mean_rr(table_a, case3_ids()))?,
        mean_rr_b: mean_or_none(mean_rr(table_b, case3_ids()))?,
        gating: config.gating,
        decomposition,
    };

    let mut verdicts = Vec::with_capacity(4);
    for rule in [VerdictRule::Strict, VerdictRule::Hippocratic] {
        for metric in [VerdictMetric::Esl, VerdictMetric::Rr] {
            verdicts.push(verdict(&stats, metric, rule));
        }
    }

    let named: [(&str, &TestResult); 8] = [
        ("case2.binomial", &case2),
        ("case3.esl.t", &esl_t),
        ("case3.esl.wsr", &esl_wsr),
        ("case3.rr.t", &rr_t),
        ("case3.rr.wsr", &rr_wsr),
        ("naive.t", &naive.t),
        ("naive.wrs", &naive.wrs),
        ("naive.wsr", &naive.wsr),
    ];
    let raw: Vec<f64> = named.iter().map(|(_, t)| t.p_value).collect();
    let adjusted = bonferroni(&raw, config.family_size)?;
    let p_values = named
        .iter()
        .zip(raw.iter().zip(adjusted))
        .map(|((name, _), (&raw, adjusted))| (name.to_string(), AdjustedP { raw, adjusted }))
        .collect();

    let report = ComparisonReport {
        schema_version: SCHEMA_VERSION.to_string(),
        run_a: table_a.run_name.clone(),
        run_b: table_b.run_name.clone(),
        k: table_a.k,
        queries: universe.len(),
        mrr_a,
        mrr_b,
        delta_mrr: mrr_b - mrr_a,
        naive,
        breakdown: BreakdownReport {
            counts: CaseCounts::from(&stats.decomposition),
            fractions,
        },
        case2,
        case3: Case3Report {
            mean_esl_a: stats.mean_esl_a,
            mean_esl_b: stats.mean_esl_b,
            mean_rr_a: stats.mean_rr_a,
            mean_rr_b: stats.mean_rr_b,
            esl_wsr,
            esl_t,
            rr_wsr,
            rr_t,
        },
        gating: config.gating,
        rule: config.rule,
        metric: config.metric,
        verdicts,
        family_size: config.family_size,
        p_values,
    };
    Ok((report, stats))
}

/// Aligns, scores and compares run B against baseline run A.
pub fn compare_runs(
    qrels: &Qrels,
    run_a: &Run,
    run_b: &Run,
    config: &CompareConfig,
) -> Result<Comparison> {
    config.validate()?;
    let (universe, diagnostics) = align(qrels, &[run_a, run_b])?;
    let table_a = score_run(run_a, qrels, &universe, config.k)?;
    let table_b = score_run(run_b, qrels, &universe, config.k)?;
    let (report, stats) = compare_tables(&table_a, &table_b, config)?;
    Ok(Comparison {
        report,
        stats,
        table_a,
        table_b,
        diagnostics,
    })
}
