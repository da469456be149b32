//! Sink clustering on a coarse histogram grid.
//!
//! Trajectory terminals are binned into square cells. Cells that dominate
//! their 3x3 neighborhood become cluster seeds; every other occupied cell
//! follows the steepest-ascent chain through neighborhood maxima until it
//! reaches a seed. Count ties break toward the lowest `(row, col)` cell, so
//! the result does not depend on iteration order.

use std::collections::HashMap;

/// Clusters terminal points, returning one cluster id per point.
///
/// Ids are dense `0..K`, ordered by the `(row, col)` histogram cell of each
/// cluster's seed. Points must be finite.
pub fn cluster_sinks(points: &[(f32, f32)], sink_bin: u32) -> Vec<u32> {
    assert!(sink_bin >= 1, "sink_bin must be at least 1");
    if points.is_empty() {
        return Vec::new();
    }
    let bin = sink_bin as f32;
    let cell_of = |&(y, x): &(f32, f32)| -> (i64, i64) {
        debug_assert!(y.is_finite() && x.is_finite());
        ((y / bin).floor() as i64, (x / bin).floor() as i64)
    };

    let mut counts: HashMap<(i64, i64), u64> = HashMap::new();
    for p in points {
        *counts.entry(cell_of(p)).or_insert(0) += 1;
    }

    // Steepest-ascent target: the best cell in the 3x3 neighborhood under
    // (count desc, position asc). A cell that is its own target is a seed.
    let ascent = |cell: (i64, i64)| -> (i64, i64) {
        let mut best = (u64::MIN, (i64::MAX, i64::MAX));
        for dr in -1..=1 {
            for dc in -1..=1 {
                let cand = (cell.0 + dr, cell.1 + dc);
                let count = counts.get(&cand).copied().unwrap_or(0);
                if count > best.0 || (count == best.0 && cand < best.1) {
                    best = (count, cand);
                }
            }
        }
        best.1
    };

    // Resolve every occupied cell to its seed, with path memoization. Each
    // ascent step strictly improves (count desc, position asc), so chains
    // terminate.
    let mut seed_of: HashMap<(i64, i64), (i64, i64)> = HashMap::new();
    for &cell in counts.keys() {
        if seed_of.contains_key(&cell) {
            continue;
        }
        let mut path = vec![cell];
        let mut cur = cell;
        let seed = loop {
            if let Some(&s) = seed_of.get(&cur) {
                break s;
            }
            let next = ascent(cur);
            if next == cur {
                break cur;
            }
            path.push(next);
            cur = next;
        };
        for c in path {
            seed_of.insert(c, seed);
        }
    }

    // Number seeds by cell position for a canonical id assignment.
    let mut seeds: Vec<(i64, i64)> = seed_of.values().copied().collect();
    seeds.sort_unstable();
    seeds.dedup();
    let seed_ids: HashMap<(i64, i64), u32> =
        seeds.into_iter().enumerate().map(|(i, s)| (s, i as u32)).collect();

    points.iter().map(|p| seed_ids[&seed_of[&cell_of(p)]]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tight_cluster_gets_one_id() {
        let points = vec![(10.1, 10.2), (10.3, 9.9), (9.8, 10.0), (10.0, 10.4)];
        let ids = cluster_sinks(&points, 2);
        assert!(ids.iter().all(|&i| i == 0));
    }

    #[test]
    fn distant_clusters_get_distinct_ids() {
        let points = vec![(2.0, 2.0), (2.1, 2.2), (40.0, 40.0), (39.8, 40.1)];
        let ids = cluster_sinks(&points, 2);
        assert_eq!(ids[0], ids[1]);
        assert_eq!(ids[2], ids[3]);
        assert_ne!(ids[0], ids[2]);
        // Ids are ordered by seed cell position.
        assert_eq!(ids[0], 0);
        assert_eq!(ids[2], 1);
    }

    #[test]
    fn adjacent_cells_absorb_into_the_denser_one() {
        // Three points in one cell, one point in the neighboring cell: the
        // minority cell ascends into the dense one.
        let points = vec![(0.5, 0.5), (0.6, 0.4), (0.4, 0.6), (0.5, 2.5)];
        let ids = cluster_sinks(&points, 2);
        assert!(ids.iter().all(|&i| i == 0), "{ids:?}");
    }

    #[test]
    fn plateau_ties_break_to_lowest_cell() {
        // Two equal-count adjacent cells form one cluster seeded at the
        // lower (row, col) cell.
        let points = vec![(0.5, 0.5), (0.5, 2.5)];
        let ids = cluster_sinks(&points, 2);
        assert_eq!(ids, vec![0, 0]);
    }

    #[test]
    fn result_is_permutation_invariant() {
        let mut points = vec![
            (1.0, 1.0),
            (1.2, 0.8),
            (30.0, 5.0),
            (30.2, 5.1),
            (29.9, 4.9),
            (15.0, 15.0),
        ];
        let base = cluster_sinks(&points, 2);
        points.reverse();
        let rev = cluster_sinks(&points, 2);
        let rev_unrev: Vec<u32> = rev.into_iter().rev().collect();
        assert_eq!(base, rev_unrev);
    }

    #[test]
    fn negative_coordinates_bin_correctly() {
        // floor division must keep -0.5 and 0.5 in different cells.
        let ids = cluster_sinks(&[(-0.5, 0.0), (0.5, 0.0)], 1);
        assert_eq!(ids[0], ids[1]);
        // With bin 1 the cells are (-1, 0) and (0, 0): adjacent, equal count,
        // tie collapses them into one cluster.
        let far = cluster_sinks(&[(-3.5, 0.0), (3.5, 0.0)], 1);
        assert_ne!(far[0], far[1]);
    }

    #[test]
    fn empty_input_yields_empty_output() {
        assert!(cluster_sinks(&[], 2).is_empty());
    }
}
