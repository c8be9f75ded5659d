//! Random inputs shared by the property and acceptance suites.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use sotacheck::decompose::Decomposition;
use sotacheck::metrics::ScoreTable;
use sotacheck::stats::{Method, TestName, TestResult};
use sotacheck::verdict::{ComparisonStats, GateTest, Gating, Sidedness};

/// Random rank, unanswered with probability `miss`.
pub fn random_rank<R: Rng>(rng: &mut R, k: u32, miss: f64) -> Option<u32> {
    (!rng.random_bool(miss)).then(|| rng.random_range(1..=k))
}

pub fn table_from(name: &str, k: usize, ranks: &[Option<u32>]) -> ScoreTable {
    ScoreTable::from_ranks(
        name,
        k,
        ranks.iter().enumerate().map(|(i, r)| (format!("q{i:05}"), *r)),
    )
}

pub fn random_table_pair<R: Rng>(rng: &mut R, n: usize, k: u32) -> (ScoreTable, ScoreTable) {
    let miss_a = rng.random_range(0.0..0.5);
    let miss_b = rng.random_range(0.0..0.5);
    let a: Vec<_> = (0..n).map(|_| random_rank(rng, k, miss_a)).collect();
    let b: Vec<_> = (0..n).map(|_| random_rank(rng, k, miss_b)).collect();
    (table_from("A", k as usize, &a), table_from("B", k as usize, &b))
}

fn ids(prefix: &str, n: usize) -> BTreeSet<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// A test result with a two-sided p and one-sided tails consistent with the
/// direction `b_side` (true when the observed effect points to the B tail).
fn synthetic_test<R: Rng>(rng: &mut R, test: TestName, greater_side: bool) -> TestResult {
    let p: f64 = if rng.random_bool(0.5) {
        10f64.powf(-rng.random_range(0.0..8.0))
    } else {
        rng.random_range(0.0..1.0)
    };
    let (p_greater, p_less) = if greater_side {
        (p / 2.0, 1.0 - p / 2.0)
    } else {
        (1.0 - p / 2.0, p / 2.0)
    };
    TestResult {
        test,
        statistic: rng.random_range(-5.0..5.0),
        p_value: p,
        p_greater,
        p_less,
        n_effective: 50,
        method: Method::NormalApprox,
        degenerate: None,
    }
}

/// Arbitrary but internally consistent comparison statistics.
pub fn random_stats<R: Rng>(rng: &mut R) -> ComparisonStats {
    let a_wins = rng.random_range(0..40);
    let b_wins = rng.random_range(0..40);
    let case3 = if rng.random_bool(0.05) { 0 } else { rng.random_range(1..30) };
    let decomposition = Decomposition {
        case1: ids("n", rng.random_range(0..5)),
        a_wins: ids("a", a_wins),
        b_wins: ids("b", b_wins),
        case3: ids("c", case3),
        a_better: ids("c", case3),
        b_better: BTreeSet::new(),
        tied: BTreeSet::new(),
    };
    let mean_esl_a: f64 = rng.random_range(1.0..20.0);
    let mean_esl_b: f64 = if rng.random_bool(0.1) {
        mean_esl_a
    } else {
        rng.random_range(1.0..20.0)
    };
    let mean_rr_a: f64 = rng.random_range(0.05..1.0);
    let mean_rr_b: f64 = rng.random_range(0.05..1.0);
    let gating = Gating {
        alpha: rng.random_range(0.001..0.2),
        gate: if rng.random_bool(0.5) { GateTest::Wsr } else { GateTest::PairedT },
        bonferroni_m: rng.random_bool(0.3).then(|| rng.random_range(1..12)),
        sidedness: if rng.random_bool(0.7) { Sidedness::TwoSided } else { Sidedness::OneSided },
    };
    let has3 = case3 > 0;
    ComparisonStats {
        case2_binomial: synthetic_test(rng, TestName::Binomial, b_wins >= a_wins),
        // ESL tests run on (A, B): B lower means the "less" tail
        case3_esl_wsr: synthetic_test(rng, TestName::Wsr, mean_esl_b > mean_esl_a),
        case3_esl_t: synthetic_test(rng, TestName::PairedT, mean_esl_b > mean_esl_a),
        case3_rr_wsr: synthetic_test(rng, TestName::Wsr, mean_rr_b > mean_rr_a),
        case3_rr_t: synthetic_test(rng, TestName::PairedT, mean_rr_b > mean_rr_a),
        mean_esl_a: has3.then_some(mean_esl_a),
        mean_esl_b: has3.then_some(mean_esl_b),
        mean_rr_a: has3.then_some(mean_rr_a),
        mean_rr_b: has3.then_some(mean_rr_b),
        gating,
        decomposition,
    }
}
