//! Scoring predicted card boxes against hand-labeled gold boxes with the
//! four-way error taxonomy: boxes spanning several articles, boxes holding
//! no article, articles captured only in part, and articles not captured.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layout::Rect;

pub const DEFAULT_IOU_MATCH: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// Predictions overlapping two or more gold boxes.
    pub fp_multi: usize,
    /// Predictions overlapping no gold box.
    pub fp_empty: usize,
    /// Gold boxes with some overlap but no qualifying match.
    pub fn_partial: usize,
    /// Gold boxes no prediction overlaps at all.
    pub fn_missed: usize,
    pub n_gold: usize,
    pub pct_correct: f64,
}

impl ErrorReport {
    pub fn total_errors(&self) -> usize {
        self.fp_multi + self.fp_empty + self.fn_partial + self.fn_missed
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("IoU threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
}

/// Greedy one-to-one matching by descending IoU; a gold box counts as
/// correct when it is matched at IoU >= `iou_match`. With no gold boxes the
/// page is trivially 100% correct.
pub fn evaluate_extraction(
    predicted: &[Rect],
    gold: &[Rect],
    iou_match: f64,
) -> Result<ErrorReport, EvalError> {
    if !(iou_match > 0.0 && iou_match <= 1.0) {
        return Err(EvalError::InvalidThreshold(iou_match));
    }
    let mut candidates = Vec::new();
    let mut pred_overlaps = vec![0usize; predicted.len()];
    let mut gold_overlaps = vec![0usize; gold.len()];
    for (p, pr) in predicted.iter().enumerate() {
        for (g, gr) in gold.iter().enumerate() {
            let iou = pr.iou(gr);
            if iou > 0.0 {
                pred_overlaps[p] += 1;
                gold_overlaps[g] += 1;
                if iou >= iou_match {
                    candidates.push((iou, p, g));
                }
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut pred_used = vec![false; predicted.len()];
    let mut gold_matched = vec![false; gold.len()];
    for (_, p, g) in candidates {
        if !pred_used[p] && !gold_matched[g] {
            pred_used[p] = true;
            gold_matched[g] = true;
        }
    }
    let matched = gold_matched.iter().filter(|m| **m).count();
    let fn_partial = (0..gold.len())
        .filter(|&g| !gold_matched[g] && gold_overlaps[g] > 0)
        .count();
    Ok(ErrorReport {
        fp_multi: pred_overlaps.iter().filter(|&&n| n >= 2).count(),
        fp_empty: pred_overlaps.iter().filter(|&&n| n == 0).count(),
        fn_partial,
        fn_missed: gold_overlaps.iter().filter(|&&n| n == 0).count(),
        n_gold: gold.len(),
        pct_correct: if gold.is_empty() {
            100.0
        } else {
            100.0 * matched as f64 / gold.len() as f64
        },
    })
}
