//! Optimal instance matching at an IoU threshold.
//!
//! The eligible-pair graph (IoU >= T) splits into connected components that
//! can be assigned independently; each component is solved exactly with the
//! Hungarian algorithm. Using pair weight `C + iou` with `C` larger than any
//! achievable IoU total makes maximum weight imply maximum cardinality, with
//! total IoU as the tie-breaker.

use crate::iou::IouMatrix;
use crate::metrics::{Match, MatchTable, MetricsError};

/// Computes the optimal one-to-one matching over pairs with IoU >= T.
pub fn match_at_threshold(iou: &IouMatrix, threshold: f64) -> Result<MatchTable, MetricsError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(MetricsError::ThresholdOutOfRange(threshold));
    }
    let gt_ids = iou.gt_ids();
    let pred_ids = iou.pred_ids();
    let gt_index = |id: u32| gt_ids.binary_search(&id).expect("gt id present");
    let pred_index = |id: u32| pred_ids.binary_search(&id).expect("pred id present");

    let eligible: Vec<(usize, usize, f64)> = iou
        .entries()
        .filter(|&(_, v)| v >= threshold)
        .map(|((g, p), v)| (gt_index(g), pred_index(p), v))
        .collect();

    // Connected components over the bipartite eligibility graph; nodes are
    // gt indices and offset pred indices.
    let n_nodes = gt_ids.len() + pred_ids.len();
    let mut parent: Vec<usize> = (0..n_nodes).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(g, p, _) in &eligible {
        let (rg, rp) = (find(&mut parent, g), find(&mut parent, gt_ids.len() + p));
        if rg != rp {
            parent[rg.max(rp)] = rg.min(rp);
        }
    }

    let mut by_component: std::collections::BTreeMap<usize, Vec<(usize, usize, f64)>> =
        std::collections::BTreeMap::new();
    for &(g, p, v) in &eligible {
        by_component.entry(find(&mut parent, g)).or_default().push((g, p, v));
    }

    let mut matches = Vec::new();
    for pairs in by_component.values() {
        if let [(g, p, v)] = pairs.as_slice() {
            matches.push(Match { gt_id: gt_ids[*g], pred_id: pred_ids[*p], iou: *v });
            continue;
        }
        let mut comp_gts: Vec<usize> = pairs.iter().map(|&(g, _, _)| g).collect();
        let mut comp_preds: Vec<usize> = pairs.iter().map(|&(_, p, _)| p).collect();
        comp_gts.sort_unstable();
        comp_gts.dedup();
        comp_preds.sort_unstable();
        comp_preds.dedup();

        let k = comp_gts.len().max(comp_preds.len());
        // Any weight bonus exceeding the largest possible IoU total forces
        // maximum cardinality; k + 1 is safely above it.
        let bonus = (k + 1) as f64;
        let mut weight = vec![0.0f64; k * k];
        for &(g, p, v) in pairs {
            let row = comp_gts.binary_search(&g).expect("component row");
            let col = comp_preds.binary_search(&p).expect("component col");
            weight[row * k + col] = bonus + v;
        }
        let cost: Vec<f64> = weight.iter().map(|&w| -w).collect();
        let row_of_col = min_cost_assignment(k, &cost);
        for (col, &row) in row_of_col.iter().enumerate() {
            if row < comp_gts.len() && col < comp_preds.len() && weight[row * k + col] > 0.0 {
                matches.push(Match {
                    gt_id: gt_ids[comp_gts[row]],
                    pred_id: pred_ids[comp_preds[col]],
                    iou: weight[row * k + col] - bonus,
                });
            }
        }
    }

    matches.sort_by(|a, b| (a.gt_id, a.pred_id).cmp(&(b.gt_id, b.pred_id)));
    let tp = matches.len();
    Ok(MatchTable {
        threshold,
        true_positives: tp,
        false_positives: iou.n_pred() - tp,
        false_negatives: iou.n_gt() - tp,
        matches,
    })
}

/// Minimum-cost perfect assignment on a dense square cost matrix.
///
/// Jonker-style shortest augmenting paths with row/column potentials, cubic
/// time. Returns the row assigned to each column.
fn min_cost_assignment(n: usize, cost: &[f64]) -> Vec<usize> {
    debug_assert_eq!(cost.len(), n * n);
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| p[j] - 1).collect()
}
