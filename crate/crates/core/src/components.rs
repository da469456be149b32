//! Connected-component labeling on binary grids.
//!
//! Two-pass union-find labeling. Output ids are `1..=K` ordered by the first
//! row-major pixel of each component, which makes results reproducible across
//! runs and platforms.

use crate::labelmap::InstanceLabelMap;

/// Pixel adjacency for component analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    /// Edge-adjacent neighbors only.
    Four,
    /// Edge- and corner-adjacent neighbors.
    Eight,
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        Self { parent: Vec::new() }
    }

    fn make_set(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            // Path halving keeps trees flat without recursion.
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            // Attach the larger root id under the smaller one so the root of
            // any component is its earliest provisional label.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Labels connected components of a binary grid.
///
/// `foreground` is row-major with `height * width` entries. Components are
/// numbered `1..=K` by the row-major position of their first pixel;
/// background stays `0`.
///
/// # Panics
/// Panics if `foreground.len() != height * width`.
pub fn label_connected_components(
    height: usize,
    width: usize,
    foreground: &[bool],
    connectivity: Connectivity,
) -> InstanceLabelMap {
    assert_eq!(foreground.len(), height * width, "grid length mismatch");
    let mut provisional = vec![0u32; height * width];
    let mut sets = DisjointSet::new();

    // First pass: assign provisional labels, merging with the already-visited
    // west and north (and for eight-connectivity, diagonal) neighbors.
    for r in 0..height {
        for c in 0..width {
            let i = r * width + c;
            if !foreground[i] {
                continue;
            }
            let mut label = u32::MAX;
            let adopt = |cand: usize, label: &mut u32, sets: &mut DisjointSet| {
                if foreground[cand] {
                    let l = provisional[cand];
                    if *label == u32::MAX {
                        *label = l;
                    } else {
                        sets.union(*label, l);
                    }
                }
            };
            if c > 0 {
                adopt(i - 1, &mut label, &mut sets);
            }
            if r > 0 {
                adopt(i - width, &mut label, &mut sets);
                if matches!(connectivity, Connectivity::Eight) {
                    if c > 0 {
                        adopt(i - width - 1, &mut label, &mut sets);
                    }
                    if c + 1 < width {
                        adopt(i - width + 1, &mut label, &mut sets);
                    }
                }
            }
            if label == u32::MAX {
                label = sets.make_set();
            }
            provisional[i] = label;
        }
    }

    // Second pass: flatten to roots, then renumber roots in order of first
    // appearance so final ids follow scan order.
    let mut root_to_final = std::collections::HashMap::new();
    let mut next = 0u32;
    let mut out = InstanceLabelMap::new(height, width);
    let labels = out.labels_mut();
    for (i, &fg) in foreground.iter().enumerate() {
        if fg {
            let root = sets.find(provisional[i]);
            labels[i] = *root_to_final.entry(root).or_insert_with(|| {
                next += 1;
                next
            });
        }
    }
    out
}

/// Splits every instance of a map into its four-connected parts.
///
/// Pixels stay foreground; ids are renumbered `1..=K` in scan order. Used by
/// the decoder to separate spatially disconnected pixels that converged to
/// the same sink.
pub(crate) fn split_disconnected_instances(map: &InstanceLabelMap) -> InstanceLabelMap {
    let (h, w) = (map.height(), map.width());
    let labels = map.labels();
    let mut provisional = vec![0u32; h * w];
    let mut sets = DisjointSet::new();
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            let id = labels[i];
            if id == 0 {
                continue;
            }
            let mut label = u32::MAX;
            if c > 0 && labels[i - 1] == id {
                label = provisional[i - 1];
            }
            if r > 0 && labels[i - w] == id {
                if label == u32::MAX {
                    label = provisional[i - w];
                } else {
                    sets.union(label, provisional[i - w]);
                }
            }
            if label == u32::MAX {
                label = sets.make_set();
            }
            provisional[i] = label;
        }
    }
    let mut root_to_final = std::collections::HashMap::new();
    let mut next = 0u32;
    let mut out = InstanceLabelMap::new(h, w);
    let out_labels = out.labels_mut();
    for i in 0..h * w {
        if labels[i] != 0 {
            let root = sets.find(provisional[i]);
            out_labels[i] = *root_to_final.entry(root).or_insert_with(|| {
                next += 1;
                next
            });
        }
    }
    out
}
