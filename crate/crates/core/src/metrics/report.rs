//! Dataset evaluation and the metrics report.
//!
//! The JSON layout is part of the external contract:
//!
//! ```json
//! {"threshold":0.500000,
//!  "images":[{"id":"a","n_gt":2,"n_pred":2,"tp":2,"fp":0,"fn":0,
//!             "ap":1.000000,"pq":1.000000,"sq":1.000000,"rq":1.000000}],
//!  "aggregate":{"mAP":1.000000,"mPQ":1.000000,
//!               "sparse":{"mAP":1.000000,"mPQ":1.000000,"n":1},
//!               "dense":{"mAP":0.000000,"mPQ":0.000000,"n":0}}}
//! ```
//!
//! (shown wrapped; the file is a single line). Keys appear exactly in this
//! order, floats are printed with six decimals, and images are sorted by id,
//! so a report is byte-identical across reruns and thread counts.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::iou::{pairwise_iou, IouError};
use crate::labelmap::InstanceLabelMap;
use crate::metrics::{
    ap_at_threshold, match_at_threshold, pq_at_threshold, MetricsError, SplitClass,
};

/// Per-image evaluation row.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageScore {
    pub id: String,
    pub n_gt: usize,
    pub n_pred: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub ap: f64,
    pub pq: f64,
    pub sq: f64,
    pub rq: f64,
}

/// Mean scores over one image subset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitAggregate {
    pub mean_ap: f64,
    pub mean_pq: f64,
    pub n: usize,
}

impl SplitAggregate {
    fn over(images: &[&ImageScore]) -> Self {
        let n = images.len();
        if n == 0 {
            return Self { mean_ap: 0.0, mean_pq: 0.0, n: 0 };
        }
        Self {
            mean_ap: images.iter().map(|s| s.ap).sum::<f64>() / n as f64,
            mean_pq: images.iter().map(|s| s.pq).sum::<f64>() / n as f64,
            n,
        }
    }
}

/// Full evaluation report: per-image rows plus overall and split means.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub threshold: f64,
    pub images: Vec<ImageScore>,
    pub overall: SplitAggregate,
    pub sparse: SplitAggregate,
    pub dense: SplitAggregate,
}

/// Scores every aligned gt/pred pair and aggregates per-image means.
///
/// The collections must contain exactly the same image ids, and each pair
/// must share dimensions. Per-image scoring runs in parallel; the report
/// itself is a pure function of the inputs.
pub fn evaluate_dataset(
    gt_maps: &BTreeMap<String, InstanceLabelMap>,
    pred_maps: &BTreeMap<String, InstanceLabelMap>,
    threshold: f64,
) -> Result<MetricsReport, MetricsError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(MetricsError::ThresholdOutOfRange(threshold));
    }
    for id in gt_maps.keys() {
        if !pred_maps.contains_key(id) {
            return Err(MetricsError::MissingPair(id.clone()));
        }
    }
    for id in pred_maps.keys() {
        if !gt_maps.contains_key(id) {
            return Err(MetricsError::MissingPair(id.clone()));
        }
    }

    let images: Vec<ImageScore> = gt_maps
        .par_iter()
        .map(|(id, gt)| {
            let pred = &pred_maps[id];
            let iou = pairwise_iou(gt, pred).map_err(|e| match e {
                IouError::ShapeMismatch { gt_height, gt_width, pred_height, pred_width } => {
                    MetricsError::ShapeMismatch {
                        id: id.clone(),
                        gt_height,
                        gt_width,
                        pred_height,
                        pred_width,
                    }
                }
            })?;
            let table = match_at_threshold(&iou, threshold)?;
            let ap = ap_at_threshold(&table);
            let (pq, sq, rq) = pq_at_threshold(&table);
            Ok(ImageScore {
                id: id.clone(),
                n_gt: iou.n_gt(),
                n_pred: iou.n_pred(),
                true_positives: table.true_positives,
                false_positives: table.false_positives,
                false_negatives: table.false_negatives,
                ap,
                pq,
                sq,
                rq,
            })
        })
        .collect::<Result<_, MetricsError>>()?;

    let overall = SplitAggregate::over(&images.iter().collect::<Vec<_>>());
    let sparse_rows: Vec<&ImageScore> =
        images.iter().filter(|s| SplitClass::of(s.n_gt) == SplitClass::Sparse).collect();
    let dense_rows: Vec<&ImageScore> =
        images.iter().filter(|s| SplitClass::of(s.n_gt) == SplitClass::Dense).collect();
    Ok(MetricsReport {
        threshold,
        overall,
        sparse: SplitAggregate::over(&sparse_rows),
        dense: SplitAggregate::over(&dense_rows),
        images,
    })
}

fn push_json_string(out: &mut String, s: &str) {
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => {
                out.push_str(&format!("\\u{:04x}", c as u32));
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

impl MetricsReport {
    /// Renders the report as single-line JSON with six-decimal floats.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\"threshold\":");
        out.push_str(&format!("{:.6}", self.threshold));
        out.push_str(",\"images\":[");
        for (i, s) in self.images.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("{\"id\":");
            push_json_string(&mut out, &s.id);
            out.push_str(&format!(
                ",\"n_gt\":{},\"n_pred\":{},\"tp\":{},\"fp\":{},\"fn\":{},\"ap\":{:.6},\"pq\":{:.6},\"sq\":{:.6},\"rq\":{:.6}}}",
                s.n_gt,
                s.n_pred,
                s.true_positives,
                s.false_positives,
                s.false_negatives,
                s.ap,
                s.pq,
                s.sq,
                s.rq
            ));
        }
        out.push_str("],\"aggregate\":{");
        out.push_str(&format!(
            "\"mAP\":{:.6},\"mPQ\":{:.6}",
            self.overall.mean_ap, self.overall.mean_pq
        ));
        for (name, agg) in [("sparse", &self.sparse), ("dense", &self.dense)] {
            out.push_str(&format!(
                ",\"{name}\":{{\"mAP\":{:.6},\"mPQ\":{:.6},\"n\":{}}}",
                agg.mean_ap, agg.mean_pq, agg.n
            ));
        }
        out.push_str("}}");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_of(labels: Vec<u32>, h: usize, w: usize) -> InstanceLabelMap {
        InstanceLabelMap::from_vec(h, w, labels)
    }

    fn dataset(pairs: Vec<(&str, InstanceLabelMap, InstanceLabelMap)>) -> (
        BTreeMap<String, InstanceLabelMap>,
        BTreeMap<String, InstanceLabelMap>,
    ) {
        let mut gt = BTreeMap::new();
        let mut pred = BTreeMap::new();
        for (id, g, p) in pairs {
            gt.insert(id.to_string(), g);
            pred.insert(id.to_string(), p);
        }
        (gt, pred)
    }

    #[test]
    fn self_evaluation_is_perfect() {
        let m = map_of(vec![1, 1, 0, 2], 2, 2);
        let (gt, pred) = dataset(vec![("a", m.clone(), m)]);
        let r = evaluate_dataset(&gt, &pred, 0.5).unwrap();
        assert_eq!(r.overall.mean_ap, 1.0);
        assert_eq!(r.overall.mean_pq, 1.0);
        assert_eq!(r.images[0].sq, 1.0);
        assert_eq!(r.images[0].rq, 1.0);
    }

    #[test]
    fn mean_is_unweighted_over_images() {
        // Image a scores AP 1.0; image b has 1 gt, 2 preds, one exact match:
        // tp=1 fp=1 fn=0, AP = 0.5.
        let a = map_of(vec![1, 1, 1, 1], 2, 2);
        let b_gt = map_of(vec![1, 1, 0, 0], 2, 2);
        let b_pred = map_of(vec![2, 2, 0, 3], 2, 2);
        let (gt, pred) = dataset(vec![("a", a.clone(), a), ("b", b_gt, b_pred)]);
        let r = evaluate_dataset(&gt, &pred, 0.5).unwrap();
        assert!((r.overall.mean_ap - 0.75).abs() < 1e-15);
    }

    #[test]
    fn pq_equals_sq_times_rq_per_image() {
        let (gt, pred) = dataset(vec![
            ("a", map_of(vec![1, 1, 2, 0], 2, 2), map_of(vec![1, 1, 0, 2], 2, 2)),
            ("b", map_of(vec![0, 0, 0, 0], 2, 2), map_of(vec![0, 1, 0, 0], 2, 2)),
        ]);
        let r = evaluate_dataset(&gt, &pred, 0.5).unwrap();
        for s in &r.images {
            assert!((s.pq - s.sq * s.rq).abs() < 1e-12, "{}", s.id);
        }
    }

    #[test]
    fn missing_pair_is_an_error() {
        let (mut gt, pred) = dataset(vec![("a", map_of(vec![0], 1, 1), map_of(vec![0], 1, 1))]);
        gt.insert("b".to_string(), map_of(vec![0], 1, 1));
        assert!(matches!(
            evaluate_dataset(&gt, &pred, 0.5),
            Err(MetricsError::MissingPair(id)) if id == "b"
        ));
    }

    #[test]
    fn shape_mismatch_names_the_image() {
        let (gt, pred) = dataset(vec![("a", map_of(vec![0, 0], 1, 2), map_of(vec![0, 0], 2, 1))]);
        assert!(matches!(
            evaluate_dataset(&gt, &pred, 0.5),
            Err(MetricsError::ShapeMismatch { id, .. }) if id == "a"
        ));
    }

    #[test]
    fn empty_image_contributes_perfect_scores() {
        let empty = map_of(vec![0, 0, 0, 0], 2, 2);
        let (gt, pred) = dataset(vec![("a", empty.clone(), empty)]);
        let r = evaluate_dataset(&gt, &pred, 0.5).unwrap();
        assert_eq!(r.images[0].ap, 1.0);
        assert_eq!(r.images[0].pq, 1.0);
    }

    #[test]
    fn json_layout_is_exact() {
        let m = map_of(vec![1, 1, 0, 0], 2, 2);
        let (gt, pred) = dataset(vec![("img_0", m.clone(), m)]);
        let r = evaluate_dataset(&gt, &pred, 0.5).unwrap();
        assert_eq!(
            r.to_json(),
            concat!(
                "{\"threshold\":0.500000,\"images\":[",
                "{\"id\":\"img_0\",\"n_gt\":1,\"n_pred\":1,\"tp\":1,\"fp\":0,\"fn\":0,",
                "\"ap\":1.000000,\"pq\":1.000000,\"sq\":1.000000,\"rq\":1.000000}],",
                "\"aggregate\":{\"mAP\":1.000000,\"mPQ\":1.000000,",
                "\"sparse\":{\"mAP\":1.000000,\"mPQ\":1.000000,\"n\":1},",
                "\"dense\":{\"mAP\":0.000000,\"mPQ\":0.000000,\"n\":0}}}"
            )
        );
        // And it parses as JSON.
        let parsed: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(parsed["aggregate"]["sparse"]["n"], 1);
    }

    #[test]
    fn image_order_is_sorted_and_stable() {
        let m = map_of(vec![1], 1, 1);
        let (gt, pred) = dataset(vec![
            ("b", m.clone(), m.clone()),
            ("a", m.clone(), m.clone()),
            ("c", m.clone(), m),
        ]);
        let r = evaluate_dataset(&gt, &pred, 0.5).unwrap();
        let ids: Vec<&str> = r.images.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, vec!["a", "b", "c"]);
        assert_eq!(r.to_json(), evaluate_dataset(&gt, &pred, 0.5).unwrap().to_json());
    }

    #[test]
    fn split_means_partition_the_overall_mean() {
        // One sparse image (2 gt) and one dense image (100 gt strips).
        let sparse_map = map_of(vec![1, 1, 2, 2], 2, 2);
        let dense_labels: Vec<u32> = (0..200).map(|i| (i / 2 + 1) as u32).collect();
        let dense_map = map_of(dense_labels, 1, 200);
        let (gt, pred) = dataset(vec![
            ("s", sparse_map.clone(), sparse_map),
            ("d", dense_map.clone(), dense_map),
        ]);
        let r = evaluate_dataset(&gt, &pred, 0.5).unwrap();
        assert_eq!(r.sparse.n, 1);
        assert_eq!(r.dense.n, 1);
        assert_eq!(r.overall.n, 2);
        let recombined =
            (r.sparse.mean_ap * r.sparse.n as f64 + r.dense.mean_ap * r.dense.n as f64) / 2.0;
        assert!((recombined - r.overall.mean_ap).abs() < 1e-15);
    }
}
