//! AP and PQ scoring plus the sparse/dense split.

use std::collections::BTreeMap;

use crate::metrics::MatchTable;

/// Set-matching average precision: `tp / (tp + fp + fn)`.
///
/// An empty image (no gt, no pred) scores 1: perfect agreement.
pub fn ap_at_threshold(table: &MatchTable) -> f64 {
    let denom = table.true_positives + table.false_positives + table.false_negatives;
    if denom == 0 {
        1.0
    } else {
        table.true_positives as f64 / denom as f64
    }
}

/// Panoptic quality as `(pq, sq, rq)`.
///
/// `sq` is the mean IoU over matches (1 when there are none); `rq` is
/// `tp / (tp + fp/2 + fn/2)` (1 when the denominator is 0); `pq = sq * rq`.
pub fn pq_at_threshold(table: &MatchTable) -> (f64, f64, f64) {
    let sq = if table.matches.is_empty() {
        1.0
    } else {
        table.matches.iter().map(|m| m.iou).sum::<f64>() / table.matches.len() as f64
    };
    let denom = table.true_positives as f64
        + table.false_positives as f64 / 2.0
        + table.false_negatives as f64 / 2.0;
    let rq = if denom == 0.0 { 1.0 } else { table.true_positives as f64 / denom };
    (sq * rq, sq, rq)
}

/// Dataset split label by ground-truth instance count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitClass {
    /// Fewer than 100 instances.
    Sparse,
    /// 100 or more instances.
    Dense,
}

impl SplitClass {
    pub fn of(n_gt: usize) -> Self {
        if n_gt < 100 {
            SplitClass::Sparse
        } else {
            SplitClass::Dense
        }
    }
}

/// Labels each image sparse or dense by its ground-truth count.
pub fn split_sparse_dense(counts: &BTreeMap<String, usize>) -> BTreeMap<String, SplitClass> {
    counts.iter().map(|(id, &n)| (id.clone(), SplitClass::of(n))).collect()
}
