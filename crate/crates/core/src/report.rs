//! Text, markdown, JSON and CSV renderings, plus canonical run/qrels writers.
//!
//! All output uses `.` as decimal separator and LF line endings, and depends
//! only on its input, so identical reports render to identical bytes.

use std::fmt::Write as _;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::compare::ComparisonReport;
use crate::decompose::{Decomposition, OutcomeCase};
use crate::error::{Error, Result};
use crate::ingest::{Qrels, Run};
use crate::metrics::ScoreTable;
use crate::stats::TestResult;
use crate::verdict::{VerdictMetric, VerdictRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableStyle {
    /// Naive tests over per-query RR on all queries.
    Table1,
    /// Outcome breakdown with case-3 means and tests.
    Table2,
    #[default]
    Full,
}

impl FromStr for TableStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "table1" | "naive" => Ok(TableStyle::Table1),
            "table2" | "decomposed" => Ok(TableStyle::Table2),
            "full" => Ok(TableStyle::Full),
            other => Err(Error::invalid(format!("unknown table style {other:?}"))),
        }
    }
}

/// Fixed-point with `decimals` places; never prints a negative zero.
pub fn fmt_fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// p-values: six decimals, or `d.ddE-xx` below 1e-3.
pub fn fmt_p(p: f64) -> String {
    if p >= 1e-3 {
        return format!("{p:.6}");
    }
    let s = format!("{p:.2E}");
    let (mantissa, exp) = s.split_once('E').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}E{sign}{:02}", exp.abs())
}

fn fmt_opt(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| fmt_fixed(v, decimals))
}

fn fmt_p_case3(t: &TestResult, case3_empty: bool) -> String {
    if case3_empty {
        "n/a".to_string()
    } else {
        fmt_p(t.p_value)
    }
}

const TABLE1_HEADER: [&str; 6] = ["A", "B", "Δ", "WRS p", "WSR p", "t-test p"];
const TABLE2_HEADER: [&str; 15] = [
    "A", "B", "Δ", "(1) All", "(2) A wins", "(2) B wins", "(3) All", "A ESL", "B ESL",
    "ESL WSR p", "ESL t p", "A RR", "B RR", "RR WSR p", "RR t p",
];

fn table1_cells(r: &ComparisonReport) -> Vec<String> {
    vec![
        r.run_a.clone(),
        r.run_b.clone(),
        fmt_fixed(r.delta_mrr, 4),
        fmt_p(r.naive.wrs.p_value),
        fmt_p(r.naive.wsr.p_value),
        fmt_p(r.naive.t.p_value),
    ]
}

fn table2_cells(r: &ComparisonReport) -> Vec<String> {
    let f = &r.breakdown.fractions;
    let c3 = &r.case3;
    let empty = r.breakdown.counts.both == 0;
    vec![
        r.run_a.clone(),
        r.run_b.clone(),
        fmt_fixed(r.delta_mrr, 4),
        format!("{}%", f.neither.percent_rounded()),
        format!("{}%", f.a_wins.percent_rounded()),
        format!("{}%", f.b_wins.percent_rounded()),
        format!("{}%", f.both.percent_rounded()),
        fmt_opt(c3.mean_esl_a, 2),
        fmt_opt(c3.mean_esl_b, 2),
        fmt_p_case3(&c3.esl_wsr, empty),
        fmt_p_case3(&c3.esl_t, empty),
        fmt_opt(c3.mean_rr_a, 4),
        fmt_opt(c3.mean_rr_b, 4),
        fmt_p_case3(&c3.rr_wsr, empty),
        fmt_p_case3(&c3.rr_t, empty),
    ]
}

/// Left-aligned run names, right-aligned numbers, two-space gutters.
fn fixed_width(header: &[&str], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|i| {
            rows.iter()
                .map(|r| r[i].chars().count())
                .chain([header[i].chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (i, cell) in cells.iter().enumerate() {
            let pad = widths[i] - cell.chars().count();
            if i > 0 {
                s.push_str("  ");
            }
            if i < 2 {
                s.push_str(cell);
                s.extend(std::iter::repeat_n(' ', pad));
            } else {
                s.extend(std::iter::repeat_n(' ', pad));
                s.push_str(cell);
            }
        }
        s.truncate(s.trim_end().len());
        s.push('\n');
        s
    };
    let mut out = line(header.to_vec());
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

fn markdown(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = format!("| {} |\n", header.join(" | "));
    let rules: Vec<&str> = header
        .iter()
        .enumerate()
        .map(|(i, _)| if i < 2 { "---" } else { "---:" })
        .collect();
    let _ = writeln!(out, "| {} |", rules.join(" | "));
    for row in rows {
        let _ = writeln!(out, "| {} |", row.join(" | "));
    }
    out
}

fn naive_summary(r: &ComparisonReport) -> String {
    format!(
        "Δ={}, WRS p={}, WSR p={}, t p={}\n",
        fmt_fixed(r.delta_mrr, 4),
        fmt_p(r.naive.wrs.p_value),
        fmt_p(r.naive.wsr.p_value),
        fmt_p(r.naive.t.p_value)
    )
}

fn header_block(r: &ComparisonReport) -> String {
    let c = &r.breakdown.counts;
    let mut s = String::new();
    let _ = writeln!(s, "A: {}  MRR@{} {}", r.run_a, r.k, fmt_fixed(r.mrr_a, 4));
    let _ = writeln!(s, "B: {}  MRR@{} {}", r.run_b, r.k, fmt_fixed(r.mrr_b, 4));
    let _ = writeln!(
        s,
        "queries {}: (1) {}  (2) A {} / B {}  (3) {} [A closer {}, B closer {}, tied {}]",
        r.queries, c.neither, c.a_wins, c.b_wins, c.both, c.a_better, c.b_better, c.tied
    );
    let _ = writeln!(
        s,
        "case (2) binomial: B wins {} of {}, p={}",
        c.b_wins,
        c.a_wins + c.b_wins,
        fmt_p(r.case2.p_value)
    );
    s
}

fn verdict_block(r: &ComparisonReport) -> String {
    let mut s = format!(
        "Verdicts (alpha={}{}):\n",
        r.gating.alpha,
        r.gating
            .bonferroni_m
            .map_or(String::new(), |m| format!(", Bonferroni m={m}"))
    );
    for rule in [VerdictRule::Strict, VerdictRule::Hippocratic] {
        for metric in [VerdictMetric::Esl, VerdictMetric::Rr] {
            if let Some(v) = r.verdict(rule, metric) {
                let mark = if rule == r.rule && metric == r.metric { "*" } else { " " };
                let _ = write!(s, "{mark} {:<11} {:<3}  {}", rule.to_string(), metric.to_string(), v.outcome);
                if let Some(why) = &v.degenerate {
                    let _ = write!(s, " ({why})");
                }
                s.push('\n');
            }
        }
    }
    s
}

fn adjusted_block(r: &ComparisonReport) -> String {
    let mut s = format!("p-values (raw / Bonferroni m={}):\n", r.family_size);
    let width = r.p_values.keys().map(|k| k.len()).max().unwrap_or(0);
    for (name, p) in &r.p_values {
        let _ = writeln!(s, "  {name:<width$}  {}  {}", fmt_p(p.raw), fmt_p(p.adjusted));
    }
    s
}

pub fn render_text(report: &ComparisonReport, style: TableStyle) -> String {
    render_text_many(std::slice::from_ref(report), style)
}

/// One table row per report, e.g. a baseline against several challengers.
pub fn render_text_many(reports: &[ComparisonReport], style: TableStyle) -> String {
    let t1: Vec<_> = reports.iter().map(table1_cells).collect();
    let t2: Vec<_> = reports.iter().map(table2_cells).collect();
    match style {
        TableStyle::Table1 => {
            let mut s = fixed_width(&TABLE1_HEADER, &t1);
            reports.iter().for_each(|r| s.push_str(&naive_summary(r)));
            s
        }
        TableStyle::Table2 => fixed_width(&TABLE2_HEADER, &t2),
        TableStyle::Full => {
            let mut s = String::new();
            for (i, r) in reports.iter().enumerate() {
                if i > 0 {
                    s.push('\n');
                }
                s.push_str(&header_block(r));
                s.push('\n');
                s.push_str(&fixed_width(&TABLE1_HEADER, &t1[i..=i]));
                s.push('\n');
                s.push_str(&fixed_width(&TABLE2_HEADER, &t2[i..=i]));
                s.push('\n');
                s.push_str(&verdict_block(r));
                s.push('\n');
                s.push_str(&adjusted_block(r));
            }
            s
        }
    }
}

pub fn render_markdown(reports: &[ComparisonReport], style: TableStyle) -> String {
    let t1: Vec<_> = reports.iter().map(table1_cells).collect();
    let t2: Vec<_> = reports.iter().map(table2_cells).collect();
    match style {
        TableStyle::Table1 => markdown(&TABLE1_HEADER, &t1),
        TableStyle::Table2 => markdown(&TABLE2_HEADER, &t2),
        TableStyle::Full => {
            let mut s = markdown(&TABLE1_HEADER, &t1);
            s.push('\n');
            s.push_str(&markdown(&TABLE2_HEADER, &t2));
            s.push('\n');
            let rows: Vec<Vec<String>> = reports
                .iter()
                .flat_map(|r| {
                    r.verdicts.iter().map(move |v| {
                        vec![
                            r.run_a.clone(),
                            r.run_b.clone(),
                            v.rule.to_string(),
                            v.metric.to_string(),
                            v.outcome.to_string(),
                        ]
                    })
                })
                .collect();
            s.push_str(&markdown(&["A", "B", "rule", "metric", "verdict"], &rows));
            s
        }
    }
}

/// Lossless, key-ordered JSON with a trailing newline.
pub fn render_json(report: &ComparisonReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report is serializable");
    s.push('\n');
    s
}

pub fn render_json_many(reports: &[ComparisonReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports are serializable");
    s.push('\n');
    s
}

fn opt_num(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// One CSV row per report with full-precision numbers.
pub fn render_csv(reports: &[ComparisonReport]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record([
        "run_a", "run_b", "k", "queries", "mrr_a", "mrr_b", "delta_mrr", "naive_wrs_p",
        "naive_wsr_p", "naive_t_p", "case1", "a_wins", "b_wins", "case3", "case3_a_better",
        "case3_b_better", "case3_tied", "case2_binomial_p", "mean_esl_a", "mean_esl_b",
        "esl_wsr_p", "esl_t_p", "mean_rr_a", "mean_rr_b", "rr_wsr_p", "rr_t_p",
        "strict_esl", "strict_rr", "hippocratic_esl", "hippocratic_rr",
    ])?;
    for r in reports {
        let c = &r.breakdown.counts;
        let c3 = &r.case3;
        let verdict = |rule, metric| {
            r.verdict(rule, metric)
                .map_or(String::new(), |v| format!("{:?}", v.outcome))
        };
        w.write_record([
            r.run_a.clone(),
            r.run_b.clone(),
            r.k.to_string(),
            r.queries.to_string(),
            r.mrr_a.to_string(),
            r.mrr_b.to_string(),
            r.delta_mrr.to_string(),
            r.naive.wrs.p_value.to_string(),
            r.naive.wsr.p_value.to_string(),
            r.naive.t.p_value.to_string(),
            c.neither.to_string(),
            c.a_wins.to_string(),
            c.b_wins.to_string(),
            c.both.to_string(),
            c.a_better.to_string(),
            c.b_better.to_string(),
            c.tied.to_string(),
            r.case2.p_value.to_string(),
            opt_num(c3.mean_esl_a),
            opt_num(c3.mean_esl_b),
            c3.esl_wsr.p_value.to_string(),
            c3.esl_t.p_value.to_string(),
            opt_num(c3.mean_rr_a),
            opt_num(c3.mean_rr_b),
            c3.rr_wsr.p_value.to_string(),
            c3.rr_t.p_value.to_string(),
            verdict(VerdictRule::Strict, VerdictMetric::Esl),
            verdict(VerdictRule::Strict, VerdictMetric::Rr),
            verdict(VerdictRule::Hippocratic, VerdictMetric::Esl),
            verdict(VerdictRule::Hippocratic, VerdictMetric::Rr),
        ])?;
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
}

/// `qid, rank_A, rank_B, case, rr_A, rr_B` for every universe query.
pub fn render_per_query(
    table_a: &ScoreTable,
    table_b: &ScoreTable,
    decomposition: &Decomposition,
) -> Result<String> {
    let mut s = String::from("qid\trank_A\trank_B\tcase\trr_A\trr_B\n");
    let rank = |r: Option<u32>| r.map_or_else(|| "-".to_string(), |r| r.to_string());
    for (q, a) in &table_a.scores {
        let b = table_b.get(q)?;
        let case = decomposition
            .case_of(q)
            .unwrap_or_else(|| OutcomeCase::classify(a.rank, b.rank));
        let _ = writeln!(
            s,
            "{q}\t{}\t{}\t{case}\t{}\t{}",
            rank(a.rank),
            rank(b.rank),
            a.rr,
            b.rr
        );
    }
    Ok(s)
}

/// Single-run scoring summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub run: String,
    pub k: usize,
    pub queries: usize,
    pub answered: usize,
    pub unanswered: usize,
    pub mrr: f64,
}

impl ScoreSummary {
    pub fn from_table(table: &ScoreTable) -> Result<Self> {
        let answered = table.answered();
        Ok(ScoreSummary {
            run: table.run_name.clone(),
            k: table.k,
            queries: table.len(),
            answered,
            unanswered: table.len() - answered,
            mrr: table.mrr()?,
        })
    }

    pub fn render_text(&self) -> String {
        format!(
            "run {}\nMRR@{} {}\nanswered {} of {} (unanswered {})\n",
            self.run,
            self.k,
            fmt_fixed(self.mrr, 4),
            self.answered,
            self.queries,
            self.unanswered
        )
    }
}

/// Per-query RR and rank of a single run.
pub fn render_scores_tsv(table: &ScoreTable) -> String {
    let mut s = String::from("qid\trank\trr\n");
    for (q, p) in &table.scores {
        let rank = p.rank.map_or_else(|| "-".to_string(), |r| r.to_string());
        let _ = writeln!(s, "{q}\t{rank}\t{}", p.rr);
    }
    s
}

/// A leaderboard point for the MRR-over-time view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub name: String,
    pub date: String,
    pub mrr: f64,
    pub is_sota: bool,
}

fn parse_date(date: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(date.trim(), "%Y-%m-%d")
        .map_err(|_| Error::InvalidDate(date.to_string()))
}

/// Plot-ready CSV `name,date,mrr,is_sota`, sorted by date then name.
pub fn timeline_csv(entries: &[TimelineEntry]) -> Result<String> {
    let mut rows = entries
        .iter()
        .map(|e| Ok((parse_date(&e.date)?, e)))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.name.cmp(&b.1.name)));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["name", "date", "mrr", "is_sota"])?;
    for (date, e) in rows {
        w.write_record([
            e.name.clone(),
            date.format("%Y-%m-%d").to_string(),
            e.mrr.to_string(),
            e.is_sota.to_string(),
        ])?;
    }
    finish_csv(w)
}

/// Reads `name,date,mrr[,is_sota]`. Without an `is_sota` column, an entry is
/// SOTA when its MRR beats every earlier entry.
pub fn read_timeline(text: &str) -> Result<Vec<TimelineEntry>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(ni), Some(di), Some(mi)) = (col("name"), col("date"), col("mrr")) else {
        return Err(Error::Csv("expected columns name,date,mrr".into()));
    };
    let si = col("is_sota");
    let mut entries = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |j: usize| rec.get(j).unwrap_or("").to_string();
        let line = i + 2;
        let mrr: f64 = field(mi)
            .parse()
            .map_err(|_| Error::parse(line, format!("invalid mrr {:?}", field(mi))))?;
        let is_sota = match si {
            Some(j) => field(j)
                .parse()
                .map_err(|_| Error::parse(line, format!("invalid is_sota {:?}", field(j))))?,
            None => false,
        };
        let date = field(di);
        parse_date(&date)?;
        entries.push(TimelineEntry {
            name: field(ni),
            date,
            mrr,
            is_sota,
        });
    }
    if si.is_none() {
        mark_sota(&mut entries)?;
    }
    Ok(entries)
}

/// Flags entries that displaced the best earlier score (date order, then name).
pub fn mark_sota(entries: &mut [TimelineEntry]) -> Result<()> {
    let mut order = entries
        .iter()
        .enumerate()
        .map(|(i, e)| Ok((parse_date(&e.date)?, e.name.clone(), i)))
        .collect::<Result<Vec<_>>>()?;
    order.sort();
    let mut best = f64::NEG_INFINITY;
    for (_, _, i) in order {
        let e = &mut entries[i];
        e.is_sota = e.mrr > best;
        best = best.max(e.mrr);
    }
    Ok(())
}

/// Canonical TREC run text: scores descend with rank, tag is the run name.
pub fn write_run_trec(run: &Run) -> String {
    let tag = if run.name().is_empty() || run.name().contains(char::is_whitespace) {
        "run"
    } else {
        run.name()
    };
    let mut s = String::new();
    for (q, docs) in run.rankings() {
        let n = docs.len();
        for (i, d) in docs.iter().enumerate() {
            let _ = writeln!(s, "{q} Q0 {d} {} {} {tag}", i + 1, n - i);
        }
    }
    s
}

pub fn write_run_msmarco(run: &Run) -> String {
    let mut s = String::new();
    for (q, docs) in run.rankings() {
        for (i, d) in docs.iter().enumerate() {
            let _ = writeln!(s, "{q}\t{d}\t{}", i + 1);
        }
    }
    s
}

pub fn write_qrels(qrels: &Qrels) -> String {
    let mut s = String::new();
    for (q, docs) in qrels.judgments() {
        for d in docs {
            let _ = writeln!(s, "{q} 0 {d} 1");
        }
    }
    s
}
