//! Corpus ranking with a pairwise comparator, rank agreement between
//! outlets, a topical-similarity baseline, and report output.
//!
//! A learned comparator need not be transitive, so lists are totalized with
//! a round-robin (Borda) tournament instead of a comparison sort.

mod report;
mod similarity;
mod tau;

use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use report::{emit_report, render_report, Report, ReportFormat};
pub use similarity::centroid_similarity;
pub use tau::kendall_tau;

use crate::comparator::{Comparator, ComparatorModel};

#[derive(Debug, Error, PartialEq)]
pub enum RankError {
    #[error("rankings do not cover the same items: {0}")]
    MismatchedItems(String),
    #[error("need at least one model and one article set")]
    EmptyInputs,
    #[error("corpus for outlet `{0}` is empty")]
    EmptyCorpus(String),
    #[error("line {line}: {reason}")]
    MalformedArticles { line: usize, reason: String },
    #[error("io failure: {0}")]
    IoFailure(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub text: String,
}

/// Reads an article set from JSON Lines of `{"id": ..., "text": ...}`.
pub fn read_items_jsonl<R: BufRead>(input: R) -> Result<Vec<Item>, RankError> {
    let mut items = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| RankError::IoFailure(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        items.push(serde_json::from_str(&line).map_err(|e| RankError::MalformedArticles {
            line: i + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(items)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub item_ids: Vec<String>,
    pub scores: Vec<f64>,
    pub model_outlet: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementMatrix {
    pub outlets: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

/// Outlet a comparator was trained on, used to label rankings.
pub trait Outlet {
    fn outlet_id(&self) -> &str;
}

impl Outlet for ComparatorModel {
    fn outlet_id(&self) -> &str {
        &self.outlet_id
    }
}

/// Borda score of each item: one point per pairwise win, half a point per
/// exact 0.5 prediction. Each unordered pair is predicted once; the other
/// orientation follows from antisymmetry.
pub fn round_robin_scores<C: Comparator>(model: &C, items: &[Item]) -> Vec<f64> {
    let prepared: Vec<C::Prepared> = items.iter().map(|it| model.prepare(&it.text)).collect();
    let mut scores = vec![0.0; items.len()];
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            let p = model.predict_prepared(&prepared[i], &prepared[j]);
            if p > 0.5 {
                scores[i] += 1.0;
            } else if p < 0.5 {
                scores[j] += 1.0;
            } else {
                scores[i] += 0.5;
                scores[j] += 0.5;
            }
        }
    }
    scores
}

/// Items by descending Borda score, ties broken by ascending id.
pub fn sort_items<C: Comparator + Outlet>(model: &C, items: &[Item]) -> RankedList {
    let scores = round_robin_scores(model, items);
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then_with(|| items[a].id.cmp(&items[b].id)));
    RankedList {
        item_ids: order.iter().map(|&i| items[i].id.clone()).collect(),
        scores: order.iter().map(|&i| scores[i]).collect(),
        model_outlet: model.outlet_id().to_string(),
    }
}

pub fn top_k(ranked: &RankedList, k: usize) -> Vec<String> {
    ranked.item_ids.iter().take(k).cloned().collect()
}

/// Entry `(i, j)` is the mean over article sets of τ between model i's and
/// model j's rankings of that set. Each unordered pair is computed once and
/// mirrored, so the matrix is exactly symmetric.
pub fn agreement_matrix<C: Comparator + Outlet>(
    models: &[C],
    article_sets: &[Vec<Item>],
) -> Result<AgreementMatrix, RankError> {
    if models.is_empty() || article_sets.is_empty() {
        return Err(RankError::EmptyInputs);
    }
    let rankings: Vec<Vec<RankedList>> = models
        .iter()
        .map(|m| article_sets.iter().map(|set| sort_items(m, set)).collect())
        .collect();
    let n = models.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let mut sum = 0.0;
            for (ri, rj) in rankings[i].iter().zip(&rankings[j]) {
                sum += kendall_tau(&ri.item_ids, &rj.item_ids)?;
            }
            let mean = sum / article_sets.len() as f64;
            values[i][j] = mean;
            values[j][i] = mean;
        }
    }
    Ok(AgreementMatrix {
        outlets: models.iter().map(|m| m.outlet_id().to_string()).collect(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comparator::symmetrize;

    /// Fixture comparators over texts that parse as numbers.
    enum Fx {
        /// prefers larger values
        Up(&'static str),
        /// prefers smaller values
        Down,
        /// like `Up`, except between two values >= 100 where it is reversed
        Mixed,
    }

    fn up(a: f64, b: f64) -> f64 {
        symmetrize(0.5 + 0.5 * (a - b).tanh(), 0.5 + 0.5 * (b - a).tanh())
    }

    impl Comparator for Fx {
        type Prepared = f64;
        fn prepare(&self, text: &str) -> f64 {
            text.parse().unwrap()
        }
        fn predict_prepared(&self, a: &f64, b: &f64) -> f64 {
            match self {
                Fx::Up(_) => up(*a, *b),
                Fx::Down => up(*b, *a),
                Fx::Mixed if *a >= 100.0 && *b >= 100.0 => up(*b, *a),
                Fx::Mixed => up(*a, *b),
            }
        }
    }

    impl Outlet for Fx {
        fn outlet_id(&self) -> &str {
            match self {
                Fx::Up(o) => o,
                Fx::Down => "down",
                Fx::Mixed => "mixed",
            }
        }
    }

    fn items(values: &[&str]) -> Vec<Item> {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| Item {
                id: format!("i{i}"),
                text: v.to_string(),
            })
            .collect()
    }

    #[test]
    fn single_item_scores_zero() {
        assert_eq!(round_robin_scores(&Fx::Up("o"), &items(&["3"])), vec![0.0]);
    }

    /// The ten comparisons of five items under a strict order, enumerated by
    /// hand: the largest value wins all four of its games, and so on.
    #[test]
    fn strict_order_scores() {
        let set = items(&["3", "1", "5", "2", "4"]);
        assert_eq!(round_robin_scores(&Fx::Up("o"), &set), vec![2.0, 0.0, 4.0, 1.0, 3.0]);
        let ranked = sort_items(&Fx::Up("o"), &set);
        assert_eq!(ranked.item_ids, vec!["i2", "i4", "i0", "i3", "i1"]);
        assert_eq!(ranked.scores, vec![4.0, 3.0, 2.0, 1.0, 0.0]);
        assert_eq!(ranked.model_outlet, "o");
    }

    #[test]
    fn identical_items_tie_and_sort_by_id() {
        let mut set = items(&["1", "1", "1"]);
        set.reverse();
        let ranked = sort_items(&Fx::Up("o"), &set);
        assert_eq!(ranked.scores, vec![1.0, 1.0, 1.0]);
        assert_eq!(ranked.item_ids, vec!["i0", "i1", "i2"]);
    }

    #[test]
    fn input_order_does_not_matter() {
        let set = items(&["3", "1", "5", "2", "4", "1"]);
        let mut rev = set.clone();
        rev.reverse();
        assert_eq!(sort_items(&Fx::Up("o"), &set), sort_items(&Fx::Up("o"), &rev));
    }

    #[test]
    fn top_k_bounds() {
        let ranked = sort_items(&Fx::Up("o"), &items(&["1", "2", "3"]));
        assert!(top_k(&ranked, 0).is_empty());
        assert_eq!(top_k(&ranked, 2), vec!["i2", "i1"]);
        assert_eq!(top_k(&ranked, 10).len(), 3);
    }

    #[test]
    fn agreement_of_model_with_itself() {
        let sets = vec![items(&["1", "2", "3", "4"]), items(&["9", "7", "8"])];
        let m = agreement_matrix(&[Fx::Up("a"), Fx::Up("b")], &sets).unwrap();
        assert_eq!(m.values, vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(m.outlets, vec!["a", "b"]);
        assert_eq!(agreement_matrix::<Fx>(&[], &sets), Err(RankError::EmptyInputs));
        assert_eq!(agreement_matrix(&[Fx::Up("a")], &[]), Err(RankError::EmptyInputs));
    }

    #[test]
    fn entry_equals_direct_tau_of_sorted_lists() {
        let set = items(&["4", "1", "3", "5", "2"]);
        let m = agreement_matrix(&[Fx::Up("a"), Fx::Down], std::slice::from_ref(&set)).unwrap();
        let direct = kendall_tau(
            &sort_items(&Fx::Up("a"), &set).item_ids,
            &sort_items(&Fx::Down, &set).item_ids,
        )
        .unwrap();
        assert_eq!(direct, -1.0);
        assert_eq!(m.values[0][1], direct);
        assert_eq!(m.values[1][0], direct);
    }

    #[test]
    fn agreement_averages_over_sets() {
        // Up and Mixed agree fully on the small set and are reversed on the
        // large one: mean of 1 and -1.
        let sets = vec![items(&["1", "2", "3"]), items(&["100", "200", "300"])];
        let m = agreement_matrix(&[Fx::Up("a"), Fx::Mixed], &sets).unwrap();
        assert_eq!(m.values[0][1], 0.0);
        assert_eq!(m.values[0][0], 1.0);
        assert_eq!(m.values[1][1], 1.0);
    }

    #[test]
    fn reading_articles_jsonl() {
        let text = "{\"id\": \"a\", \"text\": \"x\"}\n\n{\"id\": \"b\", \"text\": \"y\"}\n";
        let items = read_items_jsonl(text.as_bytes()).unwrap();
        assert_eq!(items.len(), 2);
        assert!(matches!(
            read_items_jsonl("{\"id\": 1}".as_bytes()),
            Err(RankError::MalformedArticles { line: 1, .. })
        ));
    }
}
