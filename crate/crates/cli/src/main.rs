mod args;

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use rayon::prelude::*;
use sotacheck::compare::{compare_runs, CompareConfig, Comparison, ComparisonReport};
use sotacheck::ingest::{parse_qrels, parse_run, IngestDiagnostics, Qrels, Run};
use sotacheck::metrics::score_run;
use sotacheck::report::{
    read_timeline, render_csv, render_json, render_json_many, render_markdown, render_per_query,
    render_scores_tsv, render_text_many, timeline_csv, ScoreSummary,
};
use sotacheck::stats::calibration::null_rejection_rates;
use sotacheck::stats::PairedSample;
use sotacheck::verdict::{Gating, Outcome, VerdictMetric};

use args::{
    Cli, Command, CompareArgs, InputArgs, OutputArg, ScoreArgs, SelfcheckArgs, SweepArgs,
    TestArgs, TimelineArgs,
};

/// Any failure the CLI reports; all of them exit with status 2.
struct Failure(String);

impl From<sotacheck::Error> for Failure {
    fn from(e: sotacheck::Error) -> Self {
        Failure(e.to_string())
    }
}

fn in_file(path: &Path) -> impl Fn(sotacheck::Error) -> Failure + '_ {
    move |e| Failure(format!("{}: {e}", path.display()))
}

type CliResult<T> = Result<T, Failure>;

const EXIT_ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Score(a) => cmd_score(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Timeline(a) => cmd_timeline(a),
        Command::Selfcheck(a) => cmd_selfcheck(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn warn(diagnostics: &IngestDiagnostics, source: &Path) {
    let text = diagnostics.to_string();
    for line in text.lines() {
        eprintln!("{}: {line}", source.display());
    }
}

fn load_qrels(input: &InputArgs) -> CliResult<Qrels> {
    let (qrels, diag) =
        parse_qrels(read(&input.qrels)?, input.policy.into()).map_err(in_file(&input.qrels))?;
    warn(&diag, &input.qrels);
    Ok(qrels)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Display names for runs: file stems, or the full path where stems collide.
fn run_names(paths: &[&Path]) -> Vec<String> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for p in paths {
        *counts.entry(stem(p)).or_default() += 1;
    }
    paths
        .iter()
        .map(|p| {
            let s = stem(p);
            if counts[&s] > 1 {
                p.display().to_string()
            } else {
                s
            }
        })
        .collect()
}

fn load_run(path: &Path, name: String, input: &InputArgs) -> CliResult<Run> {
    let (run, diag) =
        parse_run(read(path)?, input.format.into(), input.k).map_err(in_file(path))?;
    warn(&diag, path);
    Ok(run.with_name(name))
}

fn emit(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Ok(()) => Ok(()),
        // a closed pipe (e.g. `| head`) is not an error worth reporting
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(Failure(format!("stdout: {e}"))),
    }
}

/// Writes per-query TSV to a file, or returns it for stdout when the path is `-`.
fn per_query_sink(target: &Option<PathBuf>, tsv: String) -> CliResult<Option<String>> {
    match target {
        None => Ok(None),
        Some(p) if p.as_os_str() == "-" => Ok(Some(tsv)),
        Some(p) => std::fs::write(p, tsv)
            .map(|_| None)
            .map_err(|e| Failure(format!("{}: {e}", p.display()))),
    }
}

fn cmd_score(a: ScoreArgs) -> CliResult<u8> {
    let qrels = load_qrels(&a.input)?;
    let name = stem(&a.run);
    let run = load_run(&a.run, name, &a.input)?;
    let (universe, diag) = sotacheck::ingest::align(&qrels, &[&run])?;
    warn(&diag, &a.run);
    let table = score_run(&run, &qrels, &universe, a.input.k)?;
    let summary = ScoreSummary::from_table(&table)?;
    let mut out = match a.input.output {
        OutputArg::Text => summary.render_text(),
        OutputArg::Json => {
            let mut s = serde_json::to_string_pretty(&summary).map_err(|e| Failure(e.to_string()))?;
            s.push('\n');
            s
        }
        OutputArg::Csv => format!(
            "run,k,queries,answered,unanswered,mrr\n{},{},{},{},{},{}\n",
            summary.run, summary.k, summary.queries, summary.answered, summary.unanswered, summary.mrr
        ),
        OutputArg::Markdown => format!(
            "| run | k | queries | answered | unanswered | MRR |\n| --- | ---: | ---: | ---: | ---: | ---: |\n| {} | {} | {} | {} | {} | {} |\n",
            summary.run,
            summary.k,
            summary.queries,
            summary.answered,
            summary.unanswered,
            sotacheck::report::fmt_fixed(summary.mrr, 4)
        ),
    };
    if let Some(tsv) = per_query_sink(&a.input.per_query, render_scores_tsv(&table))? {
        out.push('\n');
        out.push_str(&tsv);
    }
    emit(&out)?;
    Ok(0)
}

fn config(input: &InputArgs, test: &TestArgs, default_m: usize) -> CompareConfig {
    let m = test.m.unwrap_or(default_m);
    CompareConfig {
        k: input.k,
        gating: Gating {
            alpha: test.alpha,
            gate: test.gate.into(),
            bonferroni_m: test.bonferroni_gate.then_some(m),
            sidedness: test.sided.into(),
        },
        family_size: m,
        rule: test.rule.into(),
        metric: test.metric.into(),
    }
}

fn render_reports(reports: &[ComparisonReport], output: OutputArg, test: &TestArgs) -> CliResult<String> {
    Ok(match output {
        OutputArg::Text => render_text_many(reports, test.style.into()),
        OutputArg::Markdown => render_markdown(reports, test.style.into()),
        OutputArg::Json if reports.len() == 1 => render_json(&reports[0]),
        OutputArg::Json => render_json_many(reports),
        OutputArg::Csv => render_csv(reports)?,
    })
}

fn verdict_code(outcome: Outcome) -> u8 {
    match outcome {
        Outcome::BSignificantlyBetter => 0,
        Outcome::Inconclusive => 1,
        Outcome::ASignificantlyBetter => 2,
    }
}

fn cmd_compare(a: CompareArgs) -> CliResult<u8> {
    let cfg = config(&a.input, &a.test, 1);
    cfg.validate()?;
    let qrels = load_qrels(&a.input)?;
    let names = run_names(&[&a.run_a, &a.run_b]);
    let (name_a, name_b) = if a.run_a == a.run_b {
        (stem(&a.run_a), stem(&a.run_b))
    } else {
        (names[0].clone(), names[1].clone())
    };
    let run_a = load_run(&a.run_a, name_a, &a.input)?;
    let run_b = load_run(&a.run_b, name_b, &a.input)?;
    let cmp = compare_runs(&qrels, &run_a, &run_b, &cfg)?;
    warn(&cmp.diagnostics, &a.input.qrels);
    let mut out = render_reports(std::slice::from_ref(&cmp.report), a.input.output, &a.test)?;
    let tsv = render_per_query(&cmp.table_a, &cmp.table_b, &cmp.stats.decomposition)?;
    if let Some(tsv) = per_query_sink(&a.input.per_query, tsv)? {
        out.push('\n');
        out.push_str(&tsv);
    }
    emit(&out)?;
    Ok(if a.test.fail_unless_better {
        verdict_code(cmp.report.headline().outcome)
    } else {
        0
    })
}

fn cmd_sweep(a: SweepArgs) -> CliResult<u8> {
    let mut seen = HashSet::new();
    for p in &a.challengers {
        let key = std::fs::canonicalize(p).unwrap_or_else(|_| p.clone());
        if !seen.insert(key) {
            return Err(Failure(format!("duplicate challenger {}", p.display())));
        }
    }
    let cfg = config(&a.input, &a.test, a.challengers.len());
    cfg.validate()?;
    let qrels = load_qrels(&a.input)?;

    let mut paths: Vec<&Path> = vec![a.baseline.as_path()];
    paths.extend(a.challengers.iter().map(PathBuf::as_path));
    let names = run_names(&paths);
    let baseline = load_run(&a.baseline, names[0].clone(), &a.input)?;
    let challengers = a
        .challengers
        .iter()
        .zip(&names[1..])
        .map(|(p, n)| load_run(p, n.clone(), &a.input))
        .collect::<CliResult<Vec<_>>>()?;

    // comparisons are independent; results come back in input order
    let mut comparisons: Vec<Comparison> = challengers
        .par_iter()
        .map(|c| compare_runs(&qrels, &baseline, c, &cfg))
        .collect::<Result<_, _>>()?;
    comparisons.sort_by(|x, y| x.report.run_b.cmp(&y.report.run_b));
    if let Some(first) = comparisons.first() {
        warn(&first.diagnostics, &a.input.qrels);
    }

    let reports: Vec<ComparisonReport> = comparisons.iter().map(|c| c.report.clone()).collect();
    let mut out = render_reports(&reports, a.input.output, &a.test)?;
    if a.input.per_query.is_some() {
        let mut tsv = String::new();
        for c in &comparisons {
            if comparisons.len() > 1 {
                let _ = writeln!(tsv, "# {} vs {}", c.report.run_a, c.report.run_b);
            }
            tsv.push_str(&render_per_query(&c.table_a, &c.table_b, &c.stats.decomposition)?);
        }
        if let Some(tsv) = per_query_sink(&a.input.per_query, tsv)? {
            out.push('\n');
            out.push_str(&tsv);
        }
    }
    emit(&out)?;
    if !a.test.fail_unless_better {
        return Ok(0);
    }
    // the weakest challenger decides
    Ok(reports
        .iter()
        .map(|r| verdict_code(r.headline().outcome))
        .max()
        .unwrap_or(1))
}

fn cmd_timeline(a: TimelineArgs) -> CliResult<u8> {
    let bytes = read(&a.entries)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Failure(format!("{}: invalid UTF-8", a.entries.display())))?;
    let entries = read_timeline(&text).map_err(in_file(&a.entries))?;
    emit(&timeline_csv(&entries)?)?;
    Ok(0)
}

fn cmd_selfcheck(a: SelfcheckArgs) -> CliResult<u8> {
    let qrels = load_qrels(&a.input)?;
    let names = run_names(&[&a.run_a, &a.run_b]);
    let run_a = load_run(&a.run_a, names[0].clone(), &a.input)?;
    let run_b = load_run(&a.run_b, names[1].clone(), &a.input)?;
    let cmp = compare_runs(&qrels, &run_a, &run_b, &CompareConfig { k: a.input.k, ..CompareConfig::default() })?;
    let metric: VerdictMetric = a.metric.into();
    let value = |t: &sotacheck::metrics::ScoreTable, q: &str| -> CliResult<f64> {
        let s = t.get(q)?;
        Ok(match metric {
            VerdictMetric::Esl => f64::from(s.esl.unwrap_or(0)),
            VerdictMetric::Rr => s.rr,
        })
    };
    let pairs = cmp
        .stats
        .decomposition
        .case3
        .iter()
        .map(|q| Ok((value(&cmp.table_a, q)?, value(&cmp.table_b, q)?)))
        .collect::<CliResult<Vec<_>>>()?;
    let n = pairs.len();
    let pairs = PairedSample::from_pairs(pairs)?;
    let cal = null_rejection_rates(&pairs, a.trials, a.alpha, a.seed)?;
    let out = match a.input.output {
        OutputArg::Json => {
            let mut s = serde_json::to_string_pretty(&cal).map_err(|e| Failure(e.to_string()))?;
            s.push('\n');
            s
        }
        OutputArg::Csv => format!(
            "pairs,trials,alpha,seed,wsr_rejection_rate,t_rejection_rate\n{n},{},{},{},{},{}\n",
            cal.trials, cal.alpha, a.seed, cal.wsr_rejection_rate, cal.t_rejection_rate
        ),
        OutputArg::Text | OutputArg::Markdown => format!(
            "{metric} case-3 pairs {n}, trials {}, seed {}, alpha {}\nWSR rejection rate {:.4}\nt-test rejection rate {:.4}\n",
            cal.trials, a.seed, cal.alpha, cal.wsr_rejection_rate, cal.t_rejection_rate
        ),
    };
    emit(&out)?;
    Ok(0)
}
