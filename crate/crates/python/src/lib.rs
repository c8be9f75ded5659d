//! Python bindings. The module is importable as `sotacheck`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sotacheck::compare::{CompareConfig, ComparisonReport};
use sotacheck::ingest::{self, RelevancePolicy, RunFormat};
use sotacheck::metrics::{self, ScoreTable};
use sotacheck::report::{self, TableStyle};
use sotacheck::stats::{self, Exactness, PairedSample};
use sotacheck::verdict::{GateTest, Gating, Sidedness, VerdictMetric, VerdictRule};

create_exception!(sotacheck, SotacheckError, PyValueError);

fn err(e: sotacheck::Error) -> PyErr {
    SotacheckError::new_err(e.to_string())
}

fn parse_opt<T: std::str::FromStr<Err = sotacheck::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn exactness(s: &str) -> PyResult<Exactness> {
    match s {
        "auto" => Ok(Exactness::Auto),
        "exact" => Ok(Exactness::Exact),
        "normal" => Ok(Exactness::Normal),
        other => Err(SotacheckError::new_err(format!("unknown exactness {other:?}"))),
    }
}

fn paired(x: Vec<f64>, y: Vec<f64>) -> PyResult<PairedSample> {
    PairedSample::new(x, y).map_err(err)
}

/// Relevance judgments.
#[pyclass(name = "Qrels", module = "sotacheck", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyQrels(pub ingest::Qrels);

#[pymethods]
impl PyQrels {
    /// Parse TREC qrels text. `policy` is "strict" or "first-relevant".
    #[staticmethod]
    #[pyo3(signature = (text, policy = "strict"))]
    fn parse(text: &str, policy: &str) -> PyResult<Self> {
        let (q, _) = ingest::parse_qrels(text, parse_opt::<RelevancePolicy>(policy)?).map_err(err)?;
        Ok(PyQrels(q))
    }

    /// Build from a mapping of query id to relevant document ids.
    #[staticmethod]
    fn from_dict(judgments: HashMap<String, Vec<String>>) -> Self {
        let map: BTreeMap<String, BTreeSet<String>> = judgments
            .into_iter()
            .map(|(q, docs)| (q, docs.into_iter().collect()))
            .collect();
        PyQrels(ingest::Qrels::from_map(map))
    }

    fn relevant(&self, query: &str) -> Option<Vec<String>> {
        self.0.relevant(query).map(|s| s.iter().cloned().collect())
    }

    fn queries(&self) -> Vec<String> {
        self.0.queries().map(str::to_string).collect()
    }

    fn to_trec(&self) -> String {
        report::write_qrels(&self.0)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __contains__(&self, query: &str) -> bool {
        self.0.contains(query)
    }

    fn __repr__(&self) -> String {
        format!("Qrels({} queries)", self.0.len())
    }
}

/// One system's ranked lists.
#[pyclass(name = "Run", module = "sotacheck", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyRun(pub ingest::Run);

#[pymethods]
impl PyRun {
    /// Parse a TREC or MS MARCO run, truncated to `k`.
    #[staticmethod]
    #[pyo3(signature = (text, format = "auto", k = ingest::DEFAULT_K, name = None))]
    fn parse(text: &str, format: &str, k: usize, name: Option<String>) -> PyResult<Self> {
        let (run, _) = ingest::parse_run(text, parse_opt::<RunFormat>(format)?, k).map_err(err)?;
        Ok(PyRun(match name {
            Some(n) => run.with_name(n),
            None => run,
        }))
    }

    /// Build from a mapping of query id to documents in rank order.
    #[staticmethod]
    #[pyo3(signature = (name, rankings, k = ingest::DEFAULT_K))]
    fn from_dict(name: String, rankings: HashMap<String, Vec<String>>, k: usize) -> PyResult<Self> {
        let run = ingest::Run::new(name, rankings.into_iter().collect(), k).map_err(err)?;
        Ok(PyRun(run))
    }

    #[getter]
    fn name(&self) -> &str {
        self.0.name()
    }

    fn with_name(&self, name: String) -> Self {
        PyRun(self.0.clone().with_name(name))
    }

    fn queries(&self) -> Vec<String> {
        self.0.queries().map(str::to_string).collect()
    }

    fn ranking(&self, query: &str) -> Vec<String> {
        self.0.ranking(query).to_vec()
    }

    fn to_trec(&self) -> String {
        report::write_run_trec(&self.0)
    }

    fn to_msmarco(&self) -> String {
        report::write_run_msmarco(&self.0)
    }

    fn __len__(&self) -> usize {
        self.0.rankings().len()
    }

    fn __repr__(&self) -> String {
        format!("Run({:?}, {} queries)", self.0.name(), self.0.rankings().len())
    }
}

/// Per-query rank of the relevant document for one run.
#[pyclass(name = "ScoreTable", module = "sotacheck", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyScoreTable(pub ScoreTable);

#[pymethods]
impl PyScoreTable {
    /// Build directly from ranks; `None` means not retrieved within `k`.
    #[staticmethod]
    fn from_ranks(run_name: String, k: usize, ranks: HashMap<String, Option<u32>>) -> Self {
        PyScoreTable(ScoreTable::from_ranks(run_name, k, ranks))
    }

    #[getter]
    fn run_name(&self) -> &str {
        &self.0.run_name
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k
    }

    #[getter]
    fn answered(&self) -> usize {
        self.0.answered()
    }

    fn mrr(&self) -> PyResult<f64> {
        self.0.mrr().map_err(err)
    }

    fn rank(&self, query: &str) -> PyResult<Option<u32>> {
        Ok(self.0.get(query).map_err(err)?.rank)
    }

    fn rr(&self, query: &str) -> PyResult<f64> {
        Ok(self.0.get(query).map_err(err)?.rr)
    }

    fn ranks(&self) -> BTreeMap<String, Option<u32>> {
        self.0.scores.iter().map(|(q, s)| (q.clone(), s.rank)).collect()
    }

    fn mean_rr(&self, queries: Vec<String>) -> PyResult<f64> {
        metrics::mean_rr(&self.0, queries.iter().map(String::as_str)).map_err(err)
    }

    /// Fails if any query in the subset is unanswered.
    fn mean_esl(&self, queries: Vec<String>) -> PyResult<f64> {
        metrics::mean_esl(&self.0, queries.iter().map(String::as_str)).map_err(err)
    }

    fn to_tsv(&self) -> String {
        report::render_scores_tsv(&self.0)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("ScoreTable({:?}, k={}, {} queries)", self.0.run_name, self.0.k, self.0.len())
    }
}

#[pyclass(name = "TestResult", module = "sotacheck", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyTestResult(pub stats::TestResult);

#[pymethods]
impl PyTestResult {
    #[getter]
    fn test(&self) -> String {
        self.0.test.to_string()
    }

    #[getter]
    fn statistic(&self) -> f64 {
        self.0.statistic
    }

    #[getter]
    fn p_value(&self) -> f64 {
        self.0.p_value
    }

    /// Small when the second sample (run B) tends to be larger.
    #[getter]
    fn p_greater(&self) -> f64 {
        self.0.p_greater
    }

    #[getter]
    fn p_less(&self) -> f64 {
        self.0.p_less
    }

    #[getter]
    fn n_effective(&self) -> usize {
        self.0.n_effective
    }

    #[getter]
    fn method(&self) -> String {
        format!("{:?}", self.0.method)
    }

    #[getter]
    fn degenerate(&self) -> Option<String> {
        self.0.degenerate.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "TestResult({}, statistic={}, p={}, n={})",
            self.0.test, self.0.statistic, self.0.p_value, self.0.n_effective
        )
    }
}

/// Naive and decomposed results for run B against baseline run A.
#[pyclass(name = "ComparisonReport", module = "sotacheck", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyReport(pub ComparisonReport);

#[pymethods]
impl PyReport {
    #[getter]
    fn run_a(&self) -> &str {
        &self.0.run_a
    }

    #[getter]
    fn run_b(&self) -> &str {
        &self.0.run_b
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k
    }

    #[getter]
    fn queries(&self) -> usize {
        self.0.queries
    }

    #[getter]
    fn mrr_a(&self) -> f64 {
        self.0.mrr_a
    }

    #[getter]
    fn mrr_b(&self) -> f64 {
        self.0.mrr_b
    }

    #[getter]
    fn delta_mrr(&self) -> f64 {
        self.0.delta_mrr
    }

    /// Query counts per outcome case.
    #[getter]
    fn counts(&self) -> BTreeMap<&'static str, usize> {
        let c = &self.0.breakdown.counts;
        BTreeMap::from([
            ("neither", c.neither),
            ("a_wins", c.a_wins),
            ("b_wins", c.b_wins),
            ("both", c.both),
            ("a_better", c.a_better),
            ("b_better", c.b_better),
            ("tied", c.tied),
        ])
    }

    #[getter]
    fn case2(&self) -> PyTestResult {
        PyTestResult(self.0.case2.clone())
    }

    /// Case-3 test by metric ("esl" or "rr") and test ("wsr" or "t").
    #[pyo3(signature = (metric = "esl", test = "wsr"))]
    fn case3(&self, metric: &str, test: &str) -> PyResult<PyTestResult> {
        let c = &self.0.case3;
        let t = match (parse_opt::<VerdictMetric>(metric)?, parse_opt::<GateTest>(test)?) {
            (VerdictMetric::Esl, GateTest::Wsr) => &c.esl_wsr,
            (VerdictMetric::Esl, GateTest::PairedT) => &c.esl_t,
            (VerdictMetric::Rr, GateTest::Wsr) => &c.rr_wsr,
            (VerdictMetric::Rr, GateTest::PairedT) => &c.rr_t,
        };
        Ok(PyTestResult(t.clone()))
    }

    /// Case-3 means as (A, B); `None` when no query has both runs answering.
    #[getter]
    fn case3_means(&self) -> BTreeMap<&'static str, (Option<f64>, Option<f64>)> {
        let c = &self.0.case3;
        BTreeMap::from([
            ("esl", (c.mean_esl_a, c.mean_esl_b)),
            ("rr", (c.mean_rr_a, c.mean_rr_b)),
        ])
    }

    /// Naive test over all queries: "wrs", "wsr" or "t".
    fn naive(&self, test: &str) -> PyResult<PyTestResult> {
        let n = &self.0.naive;
        let t = match test {
            "wrs" => &n.wrs,
            "wsr" => &n.wsr,
            "t" => &n.t,
            other => return Err(SotacheckError::new_err(format!("unknown naive test {other:?}"))),
        };
        Ok(PyTestResult(t.clone()))
    }

    /// Headline outcome for the configured rule and metric.
    #[getter]
    fn outcome(&self) -> String {
        self.0.headline().outcome.to_string()
    }

    fn verdict(&self, rule: &str, metric: &str) -> PyResult<String> {
        let v = self
            .0
            .verdict(parse_opt(rule)?, parse_opt(metric)?)
            .expect("every rule/metric pair is evaluated");
        Ok(v.outcome.to_string())
    }

    /// Test name to (raw, Bonferroni-adjusted) p-value.
    #[getter]
    fn p_values(&self) -> BTreeMap<String, (f64, f64)> {
        self.0
            .p_values
            .iter()
            .map(|(k, p)| (k.clone(), (p.raw, p.adjusted)))
            .collect()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        ComparisonReport::from_json(text).map(PyReport).map_err(err)
    }

    #[pyo3(signature = (style = "full"))]
    fn render_text(&self, style: &str) -> PyResult<String> {
        Ok(report::render_text(&self.0, parse_opt::<TableStyle>(style)?))
    }

    #[pyo3(signature = (style = "full"))]
    fn render_markdown(&self, style: &str) -> PyResult<String> {
        Ok(report::render_markdown(std::slice::from_ref(&self.0), parse_opt::<TableStyle>(style)?))
    }

    fn render_csv(&self) -> PyResult<String> {
        report::render_csv(std::slice::from_ref(&self.0)).map_err(err)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!(
            "ComparisonReport({:?} vs {:?}: {})",
            self.0.run_a,
            self.0.run_b,
            self.0.headline().outcome
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn config(
    k: usize,
    alpha: f64,
    m: usize,
    metric: &str,
    rule: &str,
    gate: &str,
    sided: &str,
    bonferroni_gate: bool,
) -> PyResult<CompareConfig> {
    let config = CompareConfig {
        k,
        gating: Gating {
            alpha,
            gate: parse_opt(gate)?,
            bonferroni_m: bonferroni_gate.then_some(m),
            sidedness: parse_opt::<Sidedness>(sided)?,
        },
        family_size: m,
        rule: parse_opt::<VerdictRule>(rule)?,
        metric: parse_opt(metric)?,
    };
    config.validate().map_err(err)?;
    Ok(config)
}

/// Score one run over the queries it shares with the qrels.
#[pyfunction]
#[pyo3(signature = (qrels, run, k = ingest::DEFAULT_K))]
fn score(qrels: PyRef<'_, PyQrels>, run: PyRef<'_, PyRun>, k: usize) -> PyResult<PyScoreTable> {
    let (universe, _) = ingest::align(&qrels.0, &[&run.0]).map_err(err)?;
    metrics::score_run(&run.0, &qrels.0, &universe, k)
        .map(PyScoreTable)
        .map_err(err)
}

/// Compare run B against baseline run A over their shared queries.
#[pyfunction]
#[pyo3(signature = (
    qrels, run_a, run_b, *, k = ingest::DEFAULT_K, alpha = 0.05, m = 1, metric = "esl",
    rule = "hippocratic", gate = "wsr", sided = "two", bonferroni_gate = false
))]
#[allow(clippy::too_many_arguments)]
fn compare(
    py: Python<'_>,
    qrels: PyRef<'_, PyQrels>,
    run_a: PyRef<'_, PyRun>,
    run_b: PyRef<'_, PyRun>,
    k: usize,
    alpha: f64,
    m: usize,
    metric: &str,
    rule: &str,
    gate: &str,
    sided: &str,
    bonferroni_gate: bool,
) -> PyResult<PyReport> {
    let config = config(k, alpha, m, metric, rule, gate, sided, bonferroni_gate)?;
    let (q, a, b) = (&qrels.0, &run_a.0, &run_b.0);
    let cmp = py
        .detach(|| sotacheck::compare::compare_runs(q, a, b, &config))
        .map_err(err)?;
    Ok(PyReport(cmp.report))
}

/// Compare two score tables built over the same queries and cutoff.
#[pyfunction]
#[pyo3(signature = (
    table_a, table_b, *, alpha = 0.05, m = 1, metric = "esl", rule = "hippocratic",
    gate = "wsr", sided = "two", bonferroni_gate = false
))]
#[allow(clippy::too_many_arguments)]
fn compare_tables(
    table_a: PyRef<'_, PyScoreTable>,
    table_b: PyRef<'_, PyScoreTable>,
    alpha: f64,
    m: usize,
    metric: &str,
    rule: &str,
    gate: &str,
    sided: &str,
    bonferroni_gate: bool,
) -> PyResult<PyReport> {
    let config = config(table_a.0.k, alpha, m, metric, rule, gate, sided, bonferroni_gate)?;
    let (report, _) = sotacheck::compare::compare_tables(&table_a.0, &table_b.0, &config).map_err(err)?;
    Ok(PyReport(report))
}

#[pyfunction]
#[pyo3(signature = (x, y, exactness = "auto"))]
fn wilcoxon_signed_rank(x: Vec<f64>, y: Vec<f64>, exactness: &str) -> PyResult<PyTestResult> {
    let e = self::exactness(exactness)?;
    stats::wilcoxon_signed_rank_with(&paired(x, y)?, e)
        .map(PyTestResult)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (x, y, exactness = "auto"))]
fn wilcoxon_rank_sum(x: Vec<f64>, y: Vec<f64>, exactness: &str) -> PyResult<PyTestResult> {
    let e = self::exactness(exactness)?;
    stats::wilcoxon_rank_sum_with(&x, &y, e)
        .map(PyTestResult)
        .map_err(err)
}

#[pyfunction]
fn paired_t_test(x: Vec<f64>, y: Vec<f64>) -> PyResult<PyTestResult> {
    stats::paired_t_test(&paired(x, y)?)
        .map(PyTestResult)
        .map_err(err)
}

/// Exact two-sided sign test of `b_wins` successes out of `n_discordant`.
#[pyfunction]
fn binomial_sign_test(b_wins: u64, n_discordant: u64) -> PyResult<PyTestResult> {
    stats::binomial_sign_test(b_wins, n_discordant)
        .map(PyTestResult)
        .map_err(err)
}

#[pyfunction]
fn bonferroni(p_values: Vec<f64>, m: usize) -> PyResult<Vec<f64>> {
    stats::bonferroni(&p_values, m).map_err(err)
}

#[pymodule]
#[pyo3(name = "sotacheck")]
pub fn sotacheck_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SotacheckError", m.py().get_type::<SotacheckError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyQrels>()?;
    m.add_class::<PyRun>()?;
    m.add_class::<PyScoreTable>()?;
    m.add_class::<PyTestResult>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(compare_tables, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon_signed_rank, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon_rank_sum, m)?)?;
    m.add_function(wrap_pyfunction!(paired_t_test, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_sign_test, m)?)?;
    m.add_function(wrap_pyfunction!(bonferroni, m)?)?;
    Ok(())
}
