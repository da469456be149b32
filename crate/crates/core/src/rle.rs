//! Run-length encoding of instance masks.
//!
//! Runs are `(start, length)` pairs over the flattened row-major pixel index,
//! so a run may span row boundaries. Absolute starts make single runs
//! decodable without a prefix scan. One [`RleMask`] holds all runs of one
//! instance; a full label map round-trips through a list of masks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labelmap::InstanceLabelMap;

/// Run-length mask of a single instance.
///
/// Serializes as `{"id": k, "runs": [[start, len], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RleMask {
    #[serde(rename = "id")]
    pub instance_id: u32,
    pub runs: Vec<(u64, u64)>,
}

impl RleMask {
    /// Total pixel count covered by the runs.
    pub fn area(&self) -> u64 {
        self.runs.iter().map(|&(_, len)| len).sum()
    }
}

#[derive(Debug, Error)]
pub enum RleError {
    #[error("run [{start}, {len}] exceeds image size {size}")]
    OffsetOutOfBounds { start: u64, len: u64, size: u64 },
    #[error("runs overlap at flat offset {offset}")]
    OverlappingRuns { offset: u64 },
}

/// Encodes every instance of a label map, masks sorted by id, runs sorted by
/// start offset.
///
/// Background pixels produce no runs. Encoding an empty map yields an empty
/// list.
pub fn encode_rle(map: &InstanceLabelMap) -> Vec<RleMask> {
    let mut by_id: std::collections::BTreeMap<u32, Vec<(u64, u64)>> = std::collections::BTreeMap::new();
    let labels = map.labels();
    let mut i = 0usize;
    while i < labels.len() {
        let id = labels[i];
        let start = i;
        while i < labels.len() && labels[i] == id {
            i += 1;
        }
        if id != 0 {
            by_id.entry(id).or_default().push((start as u64, (i - start) as u64));
        }
    }
    by_id
        .into_iter()
        .map(|(instance_id, runs)| RleMask { instance_id, runs })
        .collect()
}

/// Decodes a list of masks into a dense label map.
///
/// Fails if any run extends past `height * width` or if two runs (from any
/// masks) claim the same pixel.
pub fn decode_rle(masks: &[RleMask], height: usize, width: usize) -> Result<InstanceLabelMap, RleError> {
    let size = (height * width) as u64;
    let mut map = InstanceLabelMap::new(height, width);
    let labels = map.labels_mut();
    for mask in masks {
        for &(start, len) in &mask.runs {
            if start.checked_add(len).is_none_or(|end| end > size) {
                return Err(RleError::OffsetOutOfBounds { start, len, size });
            }
            for off in start..start + len {
                let cell = &mut labels[off as usize];
                if *cell != 0 {
                    return Err(RleError::OverlappingRuns { offset: off });
                }
                *cell = mask.instance_id;
            }
        }
    }
    Ok(map)
}
