use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sotacheck::ingest::{RelevancePolicy, RunFormat};
use sotacheck::report::TableStyle;
use sotacheck::verdict::{GateTest, Sidedness, VerdictMetric, VerdictRule};

/// Is run B significantly better than run A? Outcome-decomposed significance
/// testing for single-relevant-document ranking runs.
#[derive(Debug, Parser)]
#[command(name = "sotacheck", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// MRR@k and answered counts for one run.
    Score(ScoreArgs),
    /// Compare run B against baseline run A.
    Compare(CompareArgs),
    /// Compare several challengers against one baseline.
    Sweep(SweepArgs),
    /// Plot-ready leaderboard timeline from a name,date,mrr CSV.
    Timeline(TimelineArgs),
    /// Monte Carlo check that the paired tests hold their level on case-3 pairs.
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Trec,
    Msmarco,
    Auto,
}

impl From<FormatArg> for RunFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Trec => RunFormat::Trec,
            FormatArg::Msmarco => RunFormat::MsMarcoTsv,
            FormatArg::Auto => RunFormat::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Strict,
    FirstRelevant,
}

impl From<PolicyArg> for RelevancePolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Strict => RelevancePolicy::Strict,
            PolicyArg::FirstRelevant => RelevancePolicy::FirstRelevant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Esl,
    Rr,
}

impl From<MetricArg> for VerdictMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Esl => VerdictMetric::Esl,
            MetricArg::Rr => VerdictMetric::Rr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Strict,
    Hippocratic,
}

impl From<RuleArg> for VerdictRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Strict => VerdictRule::Strict,
            RuleArg::Hippocratic => VerdictRule::Hippocratic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GateArg {
    Wsr,
    T,
}

impl From<GateArg> for GateTest {
    fn from(g: GateArg) -> Self {
        match g {
            GateArg::Wsr => GateTest::Wsr,
            GateArg::T => GateTest::PairedT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SidedArg {
    Two,
    One,
}

impl From<SidedArg> for Sidedness {
    fn from(s: SidedArg) -> Self {
        match s {
            SidedArg::Two => Sidedness::TwoSided,
            SidedArg::One => Sidedness::OneSided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputArg {
    Text,
    Markdown,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StyleArg {
    Table1,
    Table2,
    Full,
}

impl From<StyleArg> for TableStyle {
    fn from(s: StyleArg) -> Self {
        match s {
            StyleArg::Table1 => TableStyle::Table1,
            StyleArg::Table2 => TableStyle::Table2,
            StyleArg::Full => TableStyle::Full,
        }
    }
}

/// Inputs shared by every subcommand that reads runs.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// Relevance judgments (TREC qrels).
    #[arg(long, env = "SOTACHECK_QRELS")]
    pub qrels: PathBuf,

    /// Run file format.
    #[arg(long, value_enum, env = "SOTACHECK_FORMAT", default_value = "auto")]
    pub format: FormatArg,

    /// Rank cutoff.
    #[arg(long, env = "SOTACHECK_K", default_value_t = 100)]
    pub k: usize,

    /// What to do with queries judged to have several relevant documents.
    #[arg(long, value_enum, env = "SOTACHECK_POLICY", default_value = "strict")]
    pub policy: PolicyArg,

    #[arg(long, value_enum, env = "SOTACHECK_OUTPUT", default_value = "text")]
    pub output: OutputArg,

    /// Also write per-query ranks as TSV, to PATH or to stdout after the report.
    #[arg(
        long,
        env = "SOTACHECK_PER_QUERY",
        value_name = "PATH",
        num_args = 0..=1,
        default_missing_value = "-"
    )]
    pub per_query: Option<PathBuf>,
}

/// Significance and verdict settings.
#[derive(Debug, Args)]
pub struct TestArgs {
    /// Significance level.
    #[arg(long, env = "SOTACHECK_ALPHA", default_value_t = 0.05)]
    pub alpha: f64,

    /// Bonferroni family size. Defaults to 1 for compare and to the number
    /// of challengers for sweep.
    #[arg(long, env = "SOTACHECK_M")]
    pub m: Option<usize>,

    /// Gate verdicts on Bonferroni-adjusted rather than raw p-values.
    #[arg(long, env = "SOTACHECK_BONFERRONI_GATE")]
    pub bonferroni_gate: bool,

    /// Metric for the headline verdict.
    #[arg(long, value_enum, env = "SOTACHECK_METRIC", default_value = "esl")]
    pub metric: MetricArg,

    /// Rule for the headline verdict.
    #[arg(long, value_enum, env = "SOTACHECK_RULE", default_value = "hippocratic")]
    pub rule: RuleArg,

    /// Case-3 test that gates the verdict.
    #[arg(long, value_enum, env = "SOTACHECK_GATE", default_value = "wsr")]
    pub gate: GateArg,

    /// Two-sided p-values, or the one-sided tail in the credited direction.
    #[arg(long, value_enum, env = "SOTACHECK_SIDED", default_value = "two")]
    pub sided: SidedArg,

    /// Text and markdown layout.
    #[arg(long, value_enum, env = "SOTACHECK_STYLE", default_value = "full")]
    pub style: StyleArg,

    /// Exit 0 if B is significantly better, 1 if inconclusive, 2 if worse.
    #[arg(long, env = "SOTACHECK_FAIL_UNLESS_BETTER")]
    pub fail_unless_better: bool,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub input: InputArgs,
    pub run: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub test: TestArgs,
    /// Baseline run.
    pub run_a: PathBuf,
    /// Candidate run.
    pub run_b: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub test: TestArgs,
    pub baseline: PathBuf,
    #[arg(required = true)]
    pub challengers: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TimelineArgs {
    /// CSV with columns name,date,mrr and optionally is_sota.
    pub entries: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelfcheckArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, env = "SOTACHECK_ALPHA", default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, env = "SOTACHECK_METRIC", default_value = "esl")]
    pub metric: MetricArg,
    /// Monte Carlo trials.
    #[arg(long, env = "SOTACHECK_TRIALS", default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, env = "SOTACHECK_SEED", default_value_t = 0)]
    pub seed: u64,
    pub run_a: PathBuf,
    pub run_b: PathBuf,
}
