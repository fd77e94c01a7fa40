//! Preference pairs from one snapshot's layout.
//!
//! Only cards whose rects (grown by a gap on every side) touch are paired.
//! Each labeled edge is emitted in both orientations, so the pair set is
//! antisymmetric by construction. Ties produce no pair.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cards::ArticleCard;
use crate::clean::clean_text;
use crate::layout::{ProminenceFeatures, Rect};

pub const DEFAULT_GAP: f64 = 50.0;
pub const DEFAULT_SPLIT_RATIO: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Size,
    Position,
    Combined,
}

impl Criterion {
    pub fn code(self) -> u8 {
        match self {
            Criterion::Size => 0,
            Criterion::Position => 1,
            Criterion::Combined => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Criterion::Size),
            1 => Some(Criterion::Position),
            2 => Some(Criterion::Combined),
            _ => None,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Size => "size",
            Criterion::Position => "position",
            Criterion::Combined => "combined",
        })
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "size" => Ok(Criterion::Size),
            "position" => Ok(Criterion::Position),
            "combined" => Ok(Criterion::Combined),
            other => Err(format!("unknown criterion `{other}` (expected size, position or combined)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferencePair {
    pub text_a: String,
    pub text_b: String,
    /// 1 when `text_a` was displayed more prominently than `text_b`.
    pub label: u8,
    pub criterion: Criterion,
    pub outlet_id: String,
    pub snapshot_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairDataset {
    pub pairs: Vec<PreferencePair>,
    pub split: Split,
}

#[derive(Debug, Error)]
pub enum PairError {
    #[error("no pairs to split")]
    EmptyInput,
    #[error("split ratio {0} outside (0, 1)")]
    InvalidRatio(f64),
    #[error("line {line}: {reason}")]
    MalformedPairs { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One card as seen by the pair builder.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCard {
    pub text: String,
    pub rect: Rect,
    pub features: ProminenceFeatures,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotCards {
    pub snapshot_id: String,
    pub outlet_id: String,
    pub cards: Vec<PairCard>,
}

/// Keeps one card per anchor URL, the one with the larger area (earlier
/// in document order on ties). Input order is otherwise preserved.
pub fn dedup_by_url(cards: &[ArticleCard], rects: &[Rect]) -> Vec<usize> {
    let mut best: HashMap<&str, usize> = HashMap::new();
    for (i, card) in cards.iter().enumerate() {
        best.entry(card.anchor_url.as_str())
            .and_modify(|j| {
                if rects[i].area() > rects[*j].area() {
                    *j = i
                }
            })
            .or_insert(i);
    }
    let keep: BTreeSet<usize> = best.into_values().collect();
    keep.into_iter().collect()
}

/// Index pairs `(i, j)`, `i < j`, whose rects grown by `gap` touch.
pub fn adjacency_graph(rects: &[Rect], gap: f64) -> Vec<(usize, usize)> {
    let grown: Vec<Rect> = rects.iter().map(|r| r.expand(gap)).collect();
    let mut edges = Vec::new();
    for i in 0..grown.len() {
        for j in i + 1..grown.len() {
            if grown[i].touches(&grown[j]) {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Label for "a preferred over b" under `criterion`; `None` for ties or
/// when the combined predicate fires in neither or both directions.
pub fn label_pair(fa: &ProminenceFeatures, fb: &ProminenceFeatures, criterion: Criterion) -> Option<u8> {
    match criterion {
        Criterion::Size => {
            if fa.area > fb.area {
                Some(1)
            } else if fa.area < fb.area {
                Some(0)
            } else {
                None
            }
        }
        Criterion::Position => match fa.reading_rank.cmp(&fb.reading_rank) {
            std::cmp::Ordering::Less => Some(1),
            std::cmp::Ordering::Greater => Some(0),
            std::cmp::Ordering::Equal => None,
        },
        Criterion::Combined => {
            let favored = |x: &ProminenceFeatures, y: &ProminenceFeatures| {
                x.area > y.area || (x.top_decile && x.reading_rank < y.reading_rank)
            };
            match (favored(fa, fb), favored(fb, fa)) {
                (true, false) => Some(1),
                (false, true) => Some(0),
                _ => None,
            }
        }
    }
}

/// Pairs with the card indices they were built from.
pub fn build_pairs_indexed(
    snapshot: &SnapshotCards,
    criterion: Criterion,
    gap: f64,
) -> Vec<(usize, usize, PreferencePair)> {
    let rects: Vec<Rect> = snapshot.cards.iter().map(|c| c.rect).collect();
    let mut out = Vec::new();
    for (i, j) in adjacency_graph(&rects, gap) {
        let (a, b) = (&snapshot.cards[i], &snapshot.cards[j]);
        if a.text.is_empty() || b.text.is_empty() {
            continue;
        }
        let Some(label) = label_pair(&a.features, &b.features, criterion) else {
            continue;
        };
        let pair = |x: &PairCard, y: &PairCard, label: u8| PreferencePair {
            text_a: x.text.clone(),
            text_b: y.text.clone(),
            label,
            criterion,
            outlet_id: snapshot.outlet_id.clone(),
            snapshot_id: snapshot.snapshot_id.clone(),
        };
        out.push((i, j, pair(a, b, label)));
        out.push((j, i, pair(b, a, 1 - label)));
    }
    out
}

pub fn build_pairs(snapshot: &SnapshotCards, criterion: Criterion, gap: f64) -> Vec<PreferencePair> {
    build_pairs_indexed(snapshot, criterion, gap)
        .into_iter()
        .map(|(_, _, p)| p)
        .collect()
}

impl SnapshotCards {
    /// Assembles pair-builder input, cleaning each card's text.
    pub fn new(
        snapshot_id: &str,
        outlet_id: &str,
        cards: &[ArticleCard],
        rects: &[Rect],
        features: &[ProminenceFeatures],
    ) -> Self {
        let cards = cards
            .iter()
            .zip(rects)
            .zip(features)
            .map(|((card, rect), features)| PairCard {
                text: clean_text(&card.full_text),
                rect: *rect,
                features: features.clone(),
            })
            .collect();
        SnapshotCards {
            snapshot_id: snapshot_id.to_string(),
            outlet_id: outlet_id.to_string(),
            cards,
        }
    }
}

/// Splits by snapshot: a seeded shuffle of the distinct snapshot ids puts
/// `round(ratio * n)` of them in train and the rest in test.
pub fn split_dataset(
    pairs: Vec<PreferencePair>,
    ratio: f64,
    seed: u64,
) -> Result<(PairDataset, PairDataset), PairError> {
    if pairs.is_empty() {
        return Err(PairError::EmptyInput);
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(PairError::InvalidRatio(ratio));
    }
    let ids: BTreeSet<&str> = pairs.iter().map(|p| p.snapshot_id.as_str()).collect();
    let mut ids: Vec<String> = ids.into_iter().map(str::to_string).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (ratio * ids.len() as f64).round() as usize;
    let train_ids: BTreeSet<String> = ids.into_iter().take(n_train).collect();
    let (train, test): (Vec<_>, Vec<_>) = pairs
        .into_iter()
        .partition(|p| train_ids.contains(&p.snapshot_id));
    Ok((
        PairDataset {
            pairs: train,
            split: Split::Train,
        },
        PairDataset {
            pairs: test,
            split: Split::Test,
        },
    ))
}

pub fn write_pairs_jsonl<W: Write>(mut out: W, pairs: &[PreferencePair]) -> Result<(), PairError> {
    for pair in pairs {
        serde_json::to_writer(&mut out, pair).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_pairs_jsonl<R: BufRead>(input: R) -> Result<Vec<PreferencePair>, PairError> {
    let mut pairs = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let pair: PreferencePair = serde_json::from_str(&line).map_err(|e| PairError::MalformedPairs {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if pair.label > 1 || pair.text_a.is_empty() || pair.text_b.is_empty() {
            return Err(PairError::MalformedPairs {
                line: i + 1,
                reason: "label must be 0/1 and texts non-empty".into(),
            });
        }
        pairs.push(pair);
    }
    Ok(pairs)
}
