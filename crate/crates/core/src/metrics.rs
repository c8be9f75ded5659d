//! Per-query rank of the relevant document, reciprocal rank and expected search length.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Qrels, Run};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerQueryScore {
    pub query_id: String,
    /// 1-based rank of the best-ranked relevant document; `None` if not in the top k.
    pub rank: Option<u32>,
    pub rr: f64,
    pub esl: Option<u32>,
}

impl PerQueryScore {
    pub fn new(query_id: impl Into<String>, rank: Option<u32>) -> Self {
        PerQueryScore {
            query_id: query_id.into(),
            rank,
            rr: reciprocal_rank(rank),
            esl: esl(rank),
        }
    }

    pub fn answered(&self) -> bool {
        self.rank.is_some()
    }
}

/// Per-query scores of one run over the whole query universe at cutoff `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub run_name: String,
    pub k: usize,
    pub scores: BTreeMap<String, PerQueryScore>,
}

impl ScoreTable {
    /// Builds a table from explicit ranks. Ranks beyond `k` are treated as unanswered.
    pub fn from_ranks<I, S>(run_name: impl Into<String>, k: usize, ranks: I) -> Self
    where
        I: IntoIterator<Item = (S, Option<u32>)>,
        S: Into<String>,
    {
        let scores = ranks
            .into_iter()
            .map(|(q, r)| {
                let q = q.into();
                let r = r.filter(|&r| r >= 1 && r as usize <= k);
                (q.clone(), PerQueryScore::new(q, r))
            })
            .collect();
        ScoreTable {
            run_name: run_name.into(),
            k,
            scores,
        }
    }

    pub fn get(&self, query: &str) -> Result<&PerQueryScore> {
        self.scores
            .get(query)
            .ok_or_else(|| Error::UnknownQuery(query.to_string()))
    }

    pub fn universe(&self) -> impl Iterator<Item = &str> {
        self.scores.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn answered(&self) -> usize {
        self.scores.values().filter(|s| s.answered()).count()
    }

    /// MRR over the whole universe.
    pub fn mrr(&self) -> Result<f64> {
        mean_rr(self, self.universe())
    }
}

/// Smallest 1-based position within the top `k` holding a relevant document.
pub fn rank_of_relevant<S: AsRef<str>>(
    ranking: &[S],
    relevant: &BTreeSet<String>,
    k: usize,
) -> Option<u32> {
    ranking
        .iter()
        .take(k)
        .position(|d| relevant.contains(d.as_ref()))
        .map(|p| p as u32 + 1)
}

pub fn reciprocal_rank(rank: Option<u32>) -> f64 {
    rank.map_or(0.0, |r| 1.0 / f64::from(r))
}

/// Expected search length under a patient user: the rank itself, undefined when unanswered.
pub fn esl(rank: Option<u32>) -> Option<u32> {
    rank
}

/// Scores `run` on every universe query; queries the run lacks are unanswered.
pub fn score_run(run: &Run, qrels: &Qrels, universe: &[String], k: usize) -> Result<ScoreTable> {
    if k == 0 {
        return Err(Error::invalid("cutoff k must be at least 1"));
    }
    let scores = universe
        .iter()
        .map(|q| {
            let relevant = qrels
                .relevant(q)
                .ok_or_else(|| Error::UnknownQuery(q.clone()))?;
            let rank = rank_of_relevant(run.ranking(q), relevant, k);
            Ok((q.clone(), PerQueryScore::new(q.clone(), rank)))
        })
        .collect::<Result<_>>()?;
    Ok(ScoreTable {
        run_name: run.name().to_string(),
        k,
        scores,
    })
}

/// Sums in ascending value order so the result does not depend on subset order.
fn ordered_mean(mut values: Vec<f64>) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySubset);
    }
    values.sort_by(f64::total_cmp);
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

pub fn mean_rr<'a>(table: &ScoreTable, subset: impl IntoIterator<Item = &'a str>) -> Result<f64> {
    let values = subset
        .into_iter()
        .map(|q| table.get(q).map(|s| s.rr))
        .collect::<Result<Vec<_>>>()?;
    ordered_mean(values)
}

/// Mean ESL over a subset in which every query is answered.
pub fn mean_esl<'a>(table: &ScoreTable, subset: impl IntoIterator<Item = &'a str>) -> Result<f64> {
    let mut total: u64 = 0;
    let mut n: u64 = 0;
    for q in subset {
        let s = table.get(q)?;
        let e = s.esl.ok_or_else(|| Error::UndefinedEsl(q.to_string()))?;
        total += u64::from(e);
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptySubset);
    }
    Ok(total as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn table(ranks: &[Option<u32>]) -> ScoreTable {
        ScoreTable::from_ranks(
            "t",
            100,
            ranks.iter().enumerate().map(|(i, r)| (format!("q{i}"), *r)),
        )
    }

    #[test]
    fn rank_lookup() {
        assert_eq!(rank_of_relevant(&["d3", "d7", "d9"], &set(&["d7"]), 100), Some(2));
        assert_eq!(rank_of_relevant(&["d3", "d7"], &set(&["d5"]), 100), None);
        assert_eq!(rank_of_relevant(&["d5", "d8"], &set(&["d8", "d5"]), 100), Some(1));
        assert_eq!(rank_of_relevant(&["d3", "d7"], &set(&["d7"]), 1), None);
    }

    #[test]
    fn reciprocal_rank_values() {
        assert_eq!(reciprocal_rank(Some(1)), 1.0);
        assert_eq!(reciprocal_rank(Some(100)), 0.01);
        assert_eq!(reciprocal_rank(None), 0.0);
    }

    #[test]
    fn esl_values() {
        assert_eq!(esl(Some(1)), Some(1));
        assert_eq!(esl(Some(2)), Some(2));
        assert_eq!(esl(None), None);
    }

    #[test]
    fn score_run_composition() {
        let mut m = BTreeMap::new();
        m.insert("q1".to_string(), vec!["d7".to_string()]);
        let run = Run::new("r", m, 100).unwrap();
        let mut j = BTreeMap::new();
        j.insert("q1".to_string(), set(&["d7"]));
        j.insert("q2".to_string(), set(&["d9"]));
        let qrels = Qrels::from_map(j);
        let universe = vec!["q1".to_string(), "q2".to_string()];
        let t = score_run(&run, &qrels, &universe, 100).unwrap();
        assert_eq!(t.scores["q1"].rank, Some(1));
        assert_eq!(t.scores["q1"].rr, 1.0);
        assert_eq!(t.scores["q2"].rank, None);
        assert_eq!(t.scores["q2"].rr, 0.0);

        let empty = Run::new("e", BTreeMap::new(), 100).unwrap();
        let t = score_run(&empty, &qrels, &universe, 100).unwrap();
        assert!(t.scores.values().all(|s| s.rr == 0.0));
    }

    #[test]
    fn score_run_cutoff() {
        let docs: Vec<String> = (1..=11).map(|i| format!("d{i}")).collect();
        let mut m = BTreeMap::new();
        m.insert("q1".to_string(), docs);
        let run = Run::new("r", m, 100).unwrap();
        let mut j = BTreeMap::new();
        j.insert("q1".to_string(), set(&["d11"]));
        let qrels = Qrels::from_map(j);
        let u = vec!["q1".to_string()];
        assert_eq!(score_run(&run, &qrels, &u, 10).unwrap().scores["q1"].rr, 0.0);
        assert_eq!(score_run(&run, &qrels, &u, 11).unwrap().scores["q1"].rank, Some(11));
    }

    #[test]
    fn worked_means() {
        let a = table(&[Some(1), Some(9)]);
        let b = table(&[Some(4), Some(6)]);
        let all = ["q0", "q1"];
        assert_eq!(format!("{:.3}", mean_rr(&a, all).unwrap()), "0.556");
        assert_eq!(format!("{:.3}", mean_rr(&b, all).unwrap()), "0.208");
        assert_eq!(mean_esl(&a, all).unwrap(), 5.0);
        assert_eq!(mean_esl(&b, all).unwrap(), 5.0);
        assert_eq!(mean_esl(&table(&[Some(1), Some(5)]), all).unwrap(), 3.0);
        assert_eq!(mean_rr(&table(&[Some(1); 3]), ["q0", "q1", "q2"]).unwrap(), 1.0);
    }

    #[test]
    fn mean_errors() {
        let t = table(&[Some(1), None]);
        assert_eq!(mean_rr(&t, []).unwrap_err(), Error::EmptySubset);
        assert_eq!(mean_esl(&t, []).unwrap_err(), Error::EmptySubset);
        assert_eq!(
            mean_esl(&t, ["q0", "q1"]).unwrap_err(),
            Error::UndefinedEsl("q1".into())
        );
        assert!(matches!(mean_rr(&t, ["zz"]), Err(Error::UnknownQuery(_))));
    }

    #[test]
    fn from_ranks_drops_out_of_cutoff() {
        let t = ScoreTable::from_ranks("t", 10, [("q", Some(11))]);
        assert_eq!(t.scores["q"].rank, None);
    }
}
