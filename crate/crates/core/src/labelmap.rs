//! Dense instance label maps.
//!
//! A label map assigns every pixel a `u32` instance id, with `0` reserved for
//! background. Pixels are addressed as `(row, col)` from the top-left corner
//! and stored row-major. Instance ids carry no ordering semantics beyond
//! identity; [`InstanceLabelMap::relabel_sequential`] canonicalizes them.

use std::collections::BTreeMap;

/// A dense `height x width` grid of instance ids, `0` = background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceLabelMap {
    height: usize,
    width: usize,
    labels: Vec<u32>,
}

impl InstanceLabelMap {
    /// Creates an all-background map.
    pub fn new(height: usize, width: usize) -> Self {
        Self { height, width, labels: vec![0; height * width] }
    }

    /// Wraps an existing row-major label buffer.
    ///
    /// # Panics
    /// Panics if `labels.len() != height * width`.
    pub fn from_vec(height: usize, width: usize, labels: Vec<u32>) -> Self {
        assert_eq!(
            labels.len(),
            height * width,
            "label buffer length {} does not match {height}x{width}",
            labels.len()
        );
        Self { height, width, labels }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of pixels.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u32 {
        debug_assert!(row < self.height && col < self.width);
        self.labels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, id: u32) {
        debug_assert!(row < self.height && col < self.width);
        self.labels[row * self.width + col] = id;
    }

    /// Row-major id buffer.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [u32] {
        &mut self.labels
    }

    /// Sorted distinct non-background ids.
    pub fn ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.labels.iter().copied().filter(|&v| v != 0).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Number of distinct instances.
    pub fn n_instances(&self) -> usize {
        self.ids().len()
    }

    /// Pixel count per instance id, keyed by id.
    pub fn instance_areas(&self) -> BTreeMap<u32, u64> {
        let mut areas = BTreeMap::new();
        for &v in &self.labels {
            if v != 0 {
                *areas.entry(v).or_insert(0u64) += 1;
            }
        }
        areas
    }

    /// Largest id present, `0` for an empty map.
    pub fn max_id(&self) -> u32 {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// Rewrites ids to `1..=K` ordered by first row-major occurrence.
    ///
    /// Background stays `0`; instance membership is unchanged. The result is
    /// the canonical form used when comparing maps across codecs or runs.
    pub fn relabel_sequential(&self) -> InstanceLabelMap {
        let mut remap: BTreeMap<u32, u32> = BTreeMap::new();
        let mut next = 0u32;
        let labels = self
            .labels
            .iter()
            .map(|&v| {
                if v == 0 {
                    0
                } else {
                    *remap.entry(v).or_insert_with(|| {
                        next += 1;
                        next
                    })
                }
            })
            .collect();
        InstanceLabelMap { height: self.height, width: self.width, labels }
    }
}
