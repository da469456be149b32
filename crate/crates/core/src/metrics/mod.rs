//! Evaluation protocol: instance matching, AP/PQ scoring, dataset reports.
//!
//! Matching is optimal one-to-one assignment over pairs with IoU at or above
//! the threshold: maximum cardinality first, ties broken by maximum total
//! IoU. AP uses the set-matching form `tp / (tp + fp + fn)`; PQ factors into
//! segmentation quality (mean matched IoU) and recognition quality. Dataset
//! aggregation is the unweighted per-image mean, overall and within the
//! sparse/dense split at 100 ground-truth instances.

mod matching;
mod report;
mod scores;

pub use matching::match_at_threshold;
pub use report::{evaluate_dataset, ImageScore, MetricsReport, SplitAggregate};
pub use scores::{ap_at_threshold, pq_at_threshold, split_sparse_dense, SplitClass};

use thiserror::Error;

/// One matched gt/pred pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub gt_id: u32,
    pub pred_id: u32,
    pub iou: f64,
}

/// One-to-one correspondence between gt and pred instances at a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchTable {
    pub threshold: f64,
    /// Matched pairs sorted by `(gt_id, pred_id)`; every IoU >= threshold.
    pub matches: Vec<Match>,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("IoU threshold {0} outside (0, 1)")]
    ThresholdOutOfRange(f64),
    #[error("image {0} present in only one collection")]
    MissingPair(String),
    #[error("image {id}: gt is {gt_height}x{gt_width} but pred is {pred_height}x{pred_width}")]
    ShapeMismatch {
        id: String,
        gt_height: usize,
        gt_width: usize,
        pred_height: usize,
        pred_width: usize,
    },
}
