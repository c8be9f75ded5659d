//! Significance testing for single-relevant-document ranking runs.
//!
//! Instead of comparing two runs only by MRR, queries are split into paired
//! outcomes: neither run finds the relevant document, exactly one does, or
//! both do. The "exactly one" case is judged with an exact sign test, the
//! "both" case with paired tests on expected search length (ESL, the rank of
//! the relevant document) or reciprocal rank. Two decision rules turn the
//! results into a verdict.
//!
//! ```
//! use sotacheck::prelude::*;
//!
//! let qrels = parse_qrels("q1 0 d1 1\nq2 0 d2 1\n", RelevancePolicy::Strict).unwrap().0;
//! let a = parse_run("q1\td1\t1\nq2\tdx\t1\nq2\td2\t2\n", RunFormat::Auto, 100).unwrap().0;
//! let b = parse_run("q1\td1\t1\nq2\td2\t1\n", RunFormat::Auto, 100).unwrap().0;
//! let cmp = compare_runs(&qrels, &a, &b, &CompareConfig::default()).unwrap();
//! assert_eq!(cmp.report.mrr_b, 1.0);
//! ```

pub mod compare;
pub mod decompose;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod report;
pub mod stats;
pub mod verdict;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::compare::{compare_runs, compare_tables, CompareConfig, Comparison, ComparisonReport};
    pub use crate::decompose::{breakdown_percentages, decompose, Decomposition, OutcomeCase};
    pub use crate::ingest::{align, parse_qrels, parse_run, Qrels, RelevancePolicy, Run, RunFormat};
    pub use crate::metrics::{mean_esl, mean_rr, score_run, ScoreTable};
    pub use crate::report::{render_json, render_text, TableStyle};
    pub use crate::stats::{PairedSample, TestResult};
    pub use crate::verdict::{Outcome, VerdictMetric, VerdictRule};
}
