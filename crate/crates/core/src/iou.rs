//! Pairwise intersection-over-union between two label maps.
//!
//! One pass over the pixels accumulates per-id areas and the sparse overlap
//! table; only pairs that actually intersect are materialized. IoU values are
//! exact ratios of pixel counts evaluated in double precision.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::labelmap::InstanceLabelMap;

/// Sparse IoU table between the instances of two maps.
#[derive(Debug, Clone)]
pub struct IouMatrix {
    gt_ids: Vec<u32>,
    pred_ids: Vec<u32>,
    entries: BTreeMap<(u32, u32), f64>,
}

impl IouMatrix {
    /// Number of ground-truth instances.
    pub fn n_gt(&self) -> usize {
        self.gt_ids.len()
    }

    /// Number of predicted instances.
    pub fn n_pred(&self) -> usize {
        self.pred_ids.len()
    }

    /// Sorted distinct ground-truth ids.
    pub fn gt_ids(&self) -> &[u32] {
        &self.gt_ids
    }

    /// Sorted distinct predicted ids.
    pub fn pred_ids(&self) -> &[u32] {
        &self.pred_ids
    }

    /// IoU for a `(gt, pred)` id pair; `0.0` when the pair does not overlap.
    pub fn get(&self, gt_id: u32, pred_id: u32) -> f64 {
        self.entries.get(&(gt_id, pred_id)).copied().unwrap_or(0.0)
    }

    /// Overlapping pairs as `((gt_id, pred_id), iou)`, ordered by id pair.
    pub fn entries(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    /// Builds a table with exact prescribed values, ids `1..=n` on both
    /// sides. Matching treats the table as opaque input, so tests can probe
    /// it with overlap structures real maps rarely produce.
    #[cfg(test)]
    pub(crate) fn from_entries(n_gt: u32, n_pred: u32, pairs: &[(u32, u32, f64)]) -> Self {
        let mut entries = BTreeMap::new();
        for &(g, p, v) in pairs {
            assert!(g >= 1 && g <= n_gt && p >= 1 && p <= n_pred && (0.0..=1.0).contains(&v));
            entries.insert((g, p), v);
        }
        Self {
            gt_ids: (1..=n_gt).collect(),
            pred_ids: (1..=n_pred).collect(),
            entries,
        }
    }
}

#[derive(Debug, Error)]
pub enum IouError {
    #[error("label map shapes differ: {gt_height}x{gt_width} vs {pred_height}x{pred_width}")]
    ShapeMismatch {
        gt_height: usize,
        gt_width: usize,
        pred_height: usize,
        pred_width: usize,
    },
}

/// Computes the sparse IoU table between `gt` and `pred`.
///
/// Both maps must share the same shape. Every stored entry is in `(0, 1]`;
/// non-overlapping pairs are implicit zeros.
pub fn pairwise_iou(gt: &InstanceLabelMap, pred: &InstanceLabelMap) -> Result<IouMatrix, IouError> {
    if gt.height() != pred.height() || gt.width() != pred.width() {
        return Err(IouError::ShapeMismatch {
            gt_height: gt.height(),
            gt_width: gt.width(),
            pred_height: pred.height(),
            pred_width: pred.width(),
        });
    }
    let mut gt_areas: BTreeMap<u32, u64> = BTreeMap::new();
    let mut pred_areas: BTreeMap<u32, u64> = BTreeMap::new();
    let mut overlaps: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for (&g, &p) in gt.labels().iter().zip(pred.labels()) {
        if g != 0 {
            *gt_areas.entry(g).or_insert(0) += 1;
        }
        if p != 0 {
            *pred_areas.entry(p).or_insert(0) += 1;
        }
        if g != 0 && p != 0 {
            *overlaps.entry((g, p)).or_insert(0) += 1;
        }
    }
    let entries = overlaps
        .into_iter()
        .map(|((g, p), inter)| {
            let union = gt_areas[&g] + pred_areas[&p] - inter;
            ((g, p), inter as f64 / union as f64)
        })
        .collect();
    Ok(IouMatrix {
        gt_ids: gt_areas.into_keys().collect(),
        pred_ids: pred_areas.into_keys().collect(),
        entries,
    })
}
