//! Paired outcome taxonomy for two runs over a shared query universe.
//!
//! Every query falls in exactly one case: neither run answers it (case 1),
//! exactly one run answers it (case 2, split by which side), or both answer it
//! (case 3, split further by which side ranks the relevant document higher).

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::ScoreTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeCase {
    NeitherRetrieved,
    AWinsRetrieval,
    BWinsRetrieval,
    BothRetrieved,
}

impl OutcomeCase {
    pub fn classify(rank_a: Option<u32>, rank_b: Option<u32>) -> Self {
        match (rank_a, rank_b) {
            (None, None) => OutcomeCase::NeitherRetrieved,
            (Some(_), None) => OutcomeCase::AWinsRetrieval,
            (None, Some(_)) => OutcomeCase::BWinsRetrieval,
            (Some(_), Some(_)) => OutcomeCase::BothRetrieved,
        }
    }

    /// Short label used in per-query dumps.
    pub fn label(self) -> &'static str {
        match self {
            OutcomeCase::NeitherRetrieved => "1",
            OutcomeCase::AWinsRetrieval => "2A",
            OutcomeCase::BWinsRetrieval => "2B",
            OutcomeCase::BothRetrieved => "3",
        }
    }
}

impl fmt::Display for OutcomeCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Decomposition {
    pub case1: BTreeSet<String>,
    pub a_wins: BTreeSet<String>,
    pub b_wins: BTreeSet<String>,
    pub case3: BTreeSet<String>,
    /// Case-3 queries where A ranks the relevant document strictly higher.
    pub a_better: BTreeSet<String>,
    pub b_better: BTreeSet<String>,
    pub tied: BTreeSet<String>,
}

impl Decomposition {
    pub fn universe_len(&self) -> usize {
        self.case1.len() + self.a_wins.len() + self.b_wins.len() + self.case3.len()
    }

    /// Queries where exactly one run answers.
    pub fn discordant(&self) -> usize {
        self.a_wins.len() + self.b_wins.len()
    }

    /// The decomposition seen from the other side: A and B exchanged.
    pub fn mirrored(&self) -> Self {
        Decomposition {
            case1: self.case1.clone(),
            a_wins: self.b_wins.clone(),
            b_wins: self.a_wins.clone(),
            case3: self.case3.clone(),
            a_better: self.b_better.clone(),
            b_better: self.a_better.clone(),
            tied: self.tied.clone(),
        }
    }

    pub fn case_of(&self, query: &str) -> Option<OutcomeCase> {
        if self.case1.contains(query) {
            Some(OutcomeCase::NeitherRetrieved)
        } else if self.a_wins.contains(query) {
            Some(OutcomeCase::AWinsRetrieval)
        } else if self.b_wins.contains(query) {
            Some(OutcomeCase::BWinsRetrieval)
        } else if self.case3.contains(query) {
            Some(OutcomeCase::BothRetrieved)
        } else {
            None
        }
    }
}

/// Splits the shared universe of two score tables into outcome cases.
pub fn decompose(table_a: &ScoreTable, table_b: &ScoreTable) -> Result<Decomposition> {
    if table_a.k != table_b.k
        || table_a.scores.len() != table_b.scores.len()
        || !table_a.scores.keys().eq(table_b.scores.keys())
    {
        return Err(Error::UniverseMismatch);
    }
    let mut d = Decomposition::default();
    for (q, sa) in &table_a.scores {
        let sb = &table_b.scores[q];
        let q = q.clone();
        match OutcomeCase::classify(sa.rank, sb.rank) {
            OutcomeCase::NeitherRetrieved => {
                d.case1.insert(q);
            }
            OutcomeCase::AWinsRetrieval => {
                d.a_wins.insert(q);
            }
            OutcomeCase::BWinsRetrieval => {
                d.b_wins.insert(q);
            }
            OutcomeCase::BothRetrieved => {
                let bucket = match sa.rank.cmp(&sb.rank) {
                    std::cmp::Ordering::Less => &mut d.a_better,
                    std::cmp::Ordering::Greater => &mut d.b_better,
                    std::cmp::Ordering::Equal => &mut d.tied,
                };
                bucket.insert(q.clone());
                d.case3.insert(q);
            }
        }
    }
    Ok(d)
}

/// An exact non-negative fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Nearest integer percentage, halves rounded up.
    pub fn percent_rounded(self) -> u64 {
        (200 * self.num + self.den) / (2 * self.den)
    }
}

/// Share of the universe in each top-level case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Breakdown {
    pub neither: Fraction,
    pub a_wins: Fraction,
    pub b_wins: Fraction,
    pub both: Fraction,
}

impl Breakdown {
    pub fn as_array(&self) -> [Fraction; 4] {
        [self.neither, self.a_wins, self.b_wins, self.both]
    }
}

pub fn breakdown_percentages(d: &Decomposition) -> Result<Breakdown> {
    let den = d.universe_len() as u64;
    if den == 0 {
        return Err(Error::EmptySubset);
    }
    let frac = |n: usize| Fraction { num: n as u64, den };
    Ok(Breakdown {
        neither: frac(d.case1.len()),
        a_wins: frac(d.a_wins.len()),
        b_wins: frac(d.b_wins.len()),
        both: frac(d.case3.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(ranks: &[Option<u32>]) -> ScoreTable {
        ScoreTable::from_ranks(
            "t",
            100,
            ranks
                .iter()
                .enumerate()
                .map(|(i, r)| (format!("q{}", i + 1), *r)),
        )
    }

    fn ids(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn classify_example() {
        let a = table(&[Some(3), None, Some(7)]);
        let b = table(&[None, None, Some(2)]);
        let d = decompose(&a, &b).unwrap();
        assert_eq!(d.case1, ids(&["q2"]));
        assert_eq!(d.a_wins, ids(&["q1"]));
        assert!(d.b_wins.is_empty());
        assert_eq!(d.case3, ids(&["q3"]));
        assert_eq!(d.b_better, ids(&["q3"]));
        assert_eq!(d.case_of("q1"), Some(OutcomeCase::AWinsRetrieval));
    }

    #[test]
    fn identical_runs() {
        let a = table(&[Some(3), None, Some(7), Some(1)]);
        let d = decompose(&a, &a).unwrap();
        assert!(d.a_wins.is_empty() && d.b_wins.is_empty());
        assert_eq!(d.tied, d.case3);
    }

    #[test]
    fn large_universe_partition() {
        let a: Vec<_> = (0..5793u32).map(|i| (i % 3 != 0).then_some(i % 100 + 1)).collect();
        let b: Vec<_> = (0..5793u32).map(|i| (i % 5 != 0).then_some(i % 37 + 1)).collect();
        let d = decompose(&table(&a), &table(&b)).unwrap();
        assert_eq!(d.universe_len(), 5793);
    }

    #[test]
    fn mismatch_is_an_error() {
        let a = table(&[Some(1)]);
        let b = table(&[Some(1), None]);
        assert_eq!(decompose(&a, &b).unwrap_err(), Error::UniverseMismatch);
        let c = ScoreTable::from_ranks("t", 10, [("q1", Some(1))]);
        assert_eq!(decompose(&a, &c).unwrap_err(), Error::UniverseMismatch);
    }

    #[test]
    fn percentages() {
        let mut d = Decomposition::default();
        let mut n = 0;
        for (set, size) in [(&mut d.case1, 2), (&mut d.a_wins, 9), (&mut d.b_wins, 16), (&mut d.case3, 73)] {
            for _ in 0..size {
                set.insert(format!("q{n}"));
                n += 1;
            }
        }
        let p = breakdown_percentages(&d).unwrap();
        let shares: Vec<f64> = p.as_array().iter().map(|f| f.to_f64()).collect();
        assert_eq!(shares, [0.02, 0.09, 0.16, 0.73]);
        let rounded: Vec<u64> = p.as_array().iter().map(|f| f.percent_rounded()).collect();
        assert_eq!(rounded, [2, 9, 16, 73]);

        let all3 = decompose(&table(&[Some(1), Some(2)]), &table(&[Some(1), Some(4)])).unwrap();
        let p = breakdown_percentages(&all3).unwrap();
        assert_eq!(p.both.to_f64(), 1.0);
        assert_eq!(p.neither.to_f64(), 0.0);

        let uniform = decompose(
            &table(&[None, Some(1), None, Some(1)]),
            &table(&[None, None, Some(1), Some(1)]),
        )
        .unwrap();
        let p = breakdown_percentages(&uniform).unwrap();
        assert!(p.as_array().iter().all(|f| f.to_f64() == 0.25));

        assert!(breakdown_percentages(&Decomposition::default()).is_err());
    }

    #[test]
    fn percent_rounding_halves_up() {
        assert_eq!(Fraction { num: 1, den: 200 }.percent_rounded(), 1);
        assert_eq!(Fraction { num: 1, den: 201 }.percent_rounded(), 0);
        assert_eq!(Fraction { num: 7, den: 7 }.percent_rounded(), 100);
    }
}
