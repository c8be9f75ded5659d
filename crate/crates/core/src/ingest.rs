//! Run and qrels ingestion.
//!
//! Supported inputs:
//!
//! * TREC run: `<qid> Q0 <docid> <rank> <score> <tag>` (whitespace separated)
//! * MS MARCO run: `<qid>\t<docid>\t<rank>`
//! * TREC qrels: `<qid> 0 <docid> <grade>`, where `grade > 0` marks a relevant document
//!
//! Blank lines and lines starting with `#` are skipped everywhere. LF and CRLF
//! line endings are both accepted.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cutoff of the official leaderboard metric (MRR@100).
pub const DEFAULT_K: usize = 100;

/// How to treat queries with more than one relevant document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelevancePolicy {
    /// Exactly one relevant document per query; anything else is an error.
    #[default]
    Strict,
    /// Keep every relevant document; metrics use the best-ranked one.
    FirstRelevant,
}

impl FromStr for RelevancePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(RelevancePolicy::Strict),
            "first-relevant" => Ok(RelevancePolicy::FirstRelevant),
            other => Err(Error::invalid(format!("unknown relevance policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RunFormat {
    Trec,
    MsMarcoTsv,
    /// Sniff from the first data line: 3 tab-separated columns is MS MARCO,
    /// 6 whitespace-separated columns is TREC.
    #[default]
    Auto,
}

impl FromStr for RunFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trec" => Ok(RunFormat::Trec),
            "msmarco" | "tsv" => Ok(RunFormat::MsMarcoTsv),
            "auto" => Ok(RunFormat::Auto),
            other => Err(Error::invalid(format!("unknown run format {other:?}"))),
        }
    }
}

/// Relevance judgments: query id to the set of relevant document ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeSet<String>>,
}

impl Qrels {
    /// Builds qrels from a map, dropping queries with no relevant documents.
    pub fn from_map(judgments: BTreeMap<String, BTreeSet<String>>) -> Self {
        let judgments = judgments
            .into_iter()
            .filter(|(_, docs)| !docs.is_empty())
            .collect();
        Qrels { judgments }
    }

    pub fn relevant(&self, query: &str) -> Option<&BTreeSet<String>> {
        self.judgments.get(query)
    }

    pub fn contains(&self, query: &str) -> bool {
        self.judgments.contains_key(query)
    }

    pub fn queries(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    pub fn judgments(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.judgments
    }

    pub fn len(&self) -> usize {
        self.judgments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }
}

/// One system's ranked lists. Position in each list is the 1-based ordinal rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    name: String,
    rankings: BTreeMap<String, Vec<String>>,
}

impl Run {
    /// Validates that no list repeats a document and that every list fits in `k_max`.
    pub fn new(
        name: impl Into<String>,
        rankings: BTreeMap<String, Vec<String>>,
        k_max: usize,
    ) -> Result<Self> {
        check_k(k_max)?;
        for (query, docs) in &rankings {
            if docs.len() > k_max {
                return Err(Error::invalid(format!(
                    "query {query}: {} documents exceed cutoff {k_max}",
                    docs.len()
                )));
            }
            let mut seen = HashSet::with_capacity(docs.len());
            if let Some(dup) = docs.iter().find(|d| !seen.insert(d.as_str())) {
                return Err(Error::invalid(format!(
                    "query {query}: document {dup} listed twice"
                )));
            }
        }
        Ok(Run {
            name: name.into(),
            rankings,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Ranked list for a query; empty when the run has nothing for it.
    pub fn ranking(&self, query: &str) -> &[String] {
        self.rankings.get(query).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn rankings(&self) -> &BTreeMap<String, Vec<String>> {
        &self.rankings
    }

    pub fn queries(&self) -> impl Iterator<Item = &str> {
        self.rankings.keys().map(String::as_str)
    }
}

/// Non-fatal findings collected while reading and aligning inputs.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IngestDiagnostics {
    pub queries_in_run_not_in_qrels: usize,
    pub queries_in_qrels_not_in_run: usize,
    pub duplicate_lines_dropped: usize,
    /// Warnings tied to a source line (rank gaps, multiple relevant documents).
    pub malformed_lines: Vec<(usize, String)>,
}

impl IngestDiagnostics {
    pub fn merge(&mut self, other: IngestDiagnostics) {
        self.queries_in_run_not_in_qrels += other.queries_in_run_not_in_qrels;
        self.queries_in_qrels_not_in_run += other.queries_in_qrels_not_in_run;
        self.duplicate_lines_dropped += other.duplicate_lines_dropped;
        self.malformed_lines.extend(other.malformed_lines);
    }

    pub fn is_clean(&self) -> bool {
        *self == IngestDiagnostics::default()
    }
}

impl fmt::Display for IngestDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.queries_in_run_not_in_qrels > 0 {
            writeln!(
                f,
                "warning: {} run queries not in qrels (ignored)",
                self.queries_in_run_not_in_qrels
            )?;
        }
        if self.queries_in_qrels_not_in_run > 0 {
            writeln!(
                f,
                "warning: {} qrels queries missing from a run (scored as unanswered)",
                self.queries_in_qrels_not_in_run
            )?;
        }
        if self.duplicate_lines_dropped > 0 {
            writeln!(
                f,
                "warning: {} duplicate lines dropped",
                self.duplicate_lines_dropped
            )?;
        }
        for (line, reason) in &self.malformed_lines {
            writeln!(f, "warning: line {line}: {reason}")?;
        }
        Ok(())
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(Error::invalid("cutoff k must be at least 1"))
    } else {
        Ok(())
    }
}

/// Yields `(line_number, content)` for every data line, skipping blanks and comments.
fn data_lines(bytes: &[u8]) -> impl Iterator<Item = Result<(usize, &str)>> {
    bytes
        .split(|&b| b == b'\n')
        .enumerate()
        .filter_map(|(i, raw)| {
            let line_no = i + 1;
            let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
            match std::str::from_utf8(raw) {
                Err(_) => Some(Err(Error::parse(line_no, "invalid UTF-8"))),
                Ok(line) => {
                    let trimmed = line.trim_ascii();
                    if trimmed.is_empty() || trimmed.starts_with('#') {
                        None
                    } else {
                        Some(Ok((line_no, line)))
                    }
                }
            }
        })
}

/// Parses TREC qrels. Only judgments with grade > 0 are kept.
pub fn parse_qrels(
    text: impl AsRef<[u8]>,
    policy: RelevancePolicy,
) -> Result<(Qrels, IngestDiagnostics)> {
    let mut judgments: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut first_extra: BTreeMap<String, usize> = BTreeMap::new();
    let mut diagnostics = IngestDiagnostics::default();

    for item in data_lines(text.as_ref()) {
        let (line_no, line) = item?;
        let cols: Vec<&str> = line.split_ascii_whitespace().collect();
        let [qid, _, doc, grade] = cols[..] else {
            return Err(Error::parse(
                line_no,
                format!("expected 4 columns, found {}", cols.len()),
            ));
        };
        let grade: i64 = grade
            .parse()
            .map_err(|_| Error::parse(line_no, format!("non-integer grade {grade:?}")))?;
        if grade <= 0 {
            continue;
        }
        let docs = judgments.entry(qid.to_string()).or_default();
        if !docs.insert(doc.to_string()) {
            diagnostics.duplicate_lines_dropped += 1;
        } else if docs.len() == 2 {
            first_extra.insert(qid.to_string(), line_no);
        }
    }

    for (qid, line_no) in first_extra {
        let count = judgments[&qid].len();
        match policy {
            RelevancePolicy::Strict => return Err(Error::Multiplicity { query: qid, count }),
            RelevancePolicy::FirstRelevant => diagnostics.malformed_lines.push((
                line_no,
                format!("query {qid} has {count} relevant documents; scoring the best-ranked"),
            )),
        }
    }

    Ok((Qrels { judgments }, diagnostics))
}

struct RunLine<'a> {
    line_no: usize,
    doc: &'a str,
    rank: i64,
    score: f64,
}

fn sniff(bytes: &[u8]) -> Result<RunFormat> {
    match data_lines(bytes).next() {
        None => Ok(RunFormat::Trec),
        Some(item) => {
            let (line_no, line) = item?;
            if line.split('\t').count() == 3 {
                Ok(RunFormat::MsMarcoTsv)
            } else if line.split_ascii_whitespace().count() == 6 {
                Ok(RunFormat::Trec)
            } else {
                Err(Error::parse(
                    line_no,
                    "cannot detect run format: expected 6 whitespace-separated or 3 tab-separated columns",
                ))
            }
        }
    }
}

/// Parses a run file, ordering each query's documents by rank and truncating to `k_max`.
///
/// TREC rank ties are broken by descending score, then by document id. Repeated
/// `(query, doc)` lines after the first are dropped and counted.
pub fn parse_run(
    text: impl AsRef<[u8]>,
    format: RunFormat,
    k_max: usize,
) -> Result<(Run, IngestDiagnostics)> {
    check_k(k_max)?;
    let bytes = text.as_ref();
    let format = match format {
        RunFormat::Auto => sniff(bytes)?,
        f => f,
    };

    let mut name: Option<String> = None;
    // lines of one query are usually contiguous, so remember the current group
    let mut groups: Vec<(&str, Vec<RunLine<'_>>)> = Vec::new();
    let mut group_of: HashMap<&str, usize> = HashMap::new();
    let mut current: Option<(&str, usize)> = None;
    let mut diagnostics = IngestDiagnostics::default();

    for item in data_lines(bytes) {
        let (line_no, line) = item?;
        let (qid, doc, rank, score) = match format {
            RunFormat::Trec => {
                let mut cols = line.split_ascii_whitespace();
                let fields: [Option<&str>; 6] = std::array::from_fn(|_| cols.next());
                let extra = cols.count();
                let [Some(qid), Some(_), Some(doc), Some(rank), Some(score), Some(tag)] = fields
                else {
                    let found = fields.iter().flatten().count();
                    return Err(Error::parse(
                        line_no,
                        format!("expected 6 columns, found {found}"),
                    ));
                };
                if extra > 0 {
                    return Err(Error::parse(
                        line_no,
                        format!("expected 6 columns, found {}", 6 + extra),
                    ));
                }
                let score: f64 = score
                    .parse()
                    .ok()
                    .filter(|s: &f64| !s.is_nan())
                    .ok_or_else(|| Error::parse(line_no, format!("invalid score {score:?}")))?;
                if name.is_none() {
                    name = Some(tag.to_string());
                }
                (qid, doc, rank, score)
            }
            RunFormat::MsMarcoTsv => {
                let mut cols = line.split('\t').map(str::trim);
                let fields: [Option<&str>; 3] = std::array::from_fn(|_| cols.next());
                let extra = cols.count();
                let [Some(qid), Some(doc), Some(rank)] = fields else {
                    let found = fields.iter().flatten().count();
                    return Err(Error::parse(
                        line_no,
                        format!("expected 3 tab-separated columns, found {found}"),
                    ));
                };
                if extra > 0 {
                    return Err(Error::parse(
                        line_no,
                        format!("expected 3 tab-separated columns, found {}", 3 + extra),
                    ));
                }
                if qid.is_empty() || doc.is_empty() {
                    return Err(Error::parse(line_no, "empty query or document id"));
                }
                (qid, doc, rank, 0.0)
            }
            RunFormat::Auto => unreachable!("format resolved above"),
        };
        let rank: i64 = rank
            .parse()
            .map_err(|_| Error::parse(line_no, format!("non-integer rank {rank:?}")))?;
        let idx = match current {
            Some((q, i)) if q == qid => i,
            _ => {
                let i = *group_of.entry(qid).or_insert_with(|| {
                    groups.push((qid, Vec::new()));
                    groups.len() - 1
                });
                current = Some((qid, i));
                i
            }
        };
        groups[idx].1.push(RunLine {
            line_no,
            doc,
            rank,
            score,
        });
    }

    let mut per_query = BTreeMap::new();
    for (qid, lines) in groups {
        // keep the first line for each repeated document
        let mut seen = HashSet::with_capacity(lines.len());
        let before = lines.len();
        let lines: Vec<RunLine<'_>> = lines.into_iter().filter(|l| seen.insert(l.doc)).collect();
        diagnostics.duplicate_lines_dropped += before - lines.len();
        per_query.insert(qid, lines);
    }

    let mut rankings = BTreeMap::new();
    for (qid, mut lines) in per_query {
        match format {
            RunFormat::Trec => lines.sort_by(|a, b| {
                a.rank
                    .cmp(&b.rank)
                    .then(b.score.total_cmp(&a.score))
                    .then(a.doc.cmp(b.doc))
            }),
            _ => lines.sort_by_key(|l| l.rank),
        }
        if let Some(w) = lines.windows(2).find(|w| w[1].rank - w[0].rank > 1) {
            diagnostics.malformed_lines.push((
                w[1].line_no,
                format!(
                    "query {qid}: rank gap between {} and {}",
                    w[0].rank, w[1].rank
                ),
            ));
        }
        lines.truncate(k_max);
        rankings.insert(
            qid.to_string(),
            lines.into_iter().map(|l| l.doc.to_string()).collect(),
        );
    }

    let name = name.unwrap_or_else(|| "run".to_string());
    Ok((Run { name, rankings }, diagnostics))
}

/// Fixes the query universe for a comparison: every qrels query, in lexicographic order.
///
/// Run queries without judgments are excluded; judged queries a run does not
/// cover stay in the universe and count as unanswered for that run.
pub fn align(qrels: &Qrels, runs: &[&Run]) -> Result<(Vec<String>, IngestDiagnostics)> {
    if qrels.is_empty() {
        return Err(Error::EmptyQrels);
    }
    if runs.is_empty() {
        return Err(Error::NoRuns);
    }
    let mut diagnostics = IngestDiagnostics::default();
    for run in runs {
        diagnostics.queries_in_run_not_in_qrels +=
            run.queries().filter(|q| !qrels.contains(q)).count();
        diagnostics.queries_in_qrels_not_in_run += qrels
            .queries()
            .filter(|q| !run.rankings.contains_key(*q))
            .count();
    }
    let universe = qrels.queries().map(str::to_string).collect();
    Ok((universe, diagnostics))
}
