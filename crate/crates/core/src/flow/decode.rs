//! Flow-following decoder.
//!
//! Every pixel above the probability threshold is integrated along the flow
//! field with fixed-step Euler updates; trajectories from the same instance
//! converge to a common sink near the instance center. Sinks are clustered on
//! a coarse histogram grid, then each provisional instance is cleaned up:
//! spatially disconnected fragments are split and undersized instances
//! dropped.

use rayon::prelude::*;

use crate::components::split_disconnected_instances;
use crate::flow::{cluster_sinks, DecodeParams, FlowError, FlowField};
use crate::labelmap::InstanceLabelMap;

/// Decodes a flow field into an instance label map.
///
/// Output ids are `1..=K` in row-major order of first occurrence. The result
/// is a pure function of `(field, params)`; worker threads only split the
/// per-pixel integration loop.
pub fn follow_flows(field: &FlowField, params: &DecodeParams) -> Result<InstanceLabelMap, FlowError> {
    params.validate()?;
    let (h, w) = (field.height(), field.width());
    let n = h * w;

    // Integrate trajectories for foreground pixels. Background pixels carry
    // no terminal.
    let step = params.step_size;
    let n_iter = params.n_iter;
    let terminals: Vec<Option<(f32, f32)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            if field.prob()[i] < params.prob_threshold {
                return None;
            }
            let mut y = (i / w) as f32;
            let mut x = (i % w) as f32;
            for _ in 0..n_iter {
                let (vy, vx) = field.sample_flow(y, x);
                if vy == 0.0 && vx == 0.0 {
                    break;
                }
                y = (y + step * vy).clamp(0.0, (h - 1) as f32);
                x = (x + step * vx).clamp(0.0, (w - 1) as f32);
            }
            Some((y, x))
        })
        .collect();

    let foreground: Vec<usize> = (0..n).filter(|&i| terminals[i].is_some()).collect();
    let points: Vec<(f32, f32)> = foreground.iter().map(|&i| terminals[i].expect("foreground")).collect();
    let clusters = cluster_sinks(&points, params.sink_bin);

    let mut provisional = InstanceLabelMap::new(h, w);
    for (&i, &cluster) in foreground.iter().zip(&clusters) {
        provisional.labels_mut()[i] = cluster + 1;
    }

    // A sink cluster can attract pixels from spatially separate regions;
    // those become distinct instances.
    let split = split_disconnected_instances(&provisional);

    let areas = split.instance_areas();
    let min_size = params.min_size as u64;
    let mut filtered = split;
    if areas.values().any(|&a| a < min_size) {
        for v in filtered.labels_mut() {
            if *v != 0 && areas[v] < min_size {
                *v = 0;
            }
        }
    }
    Ok(filtered.relabel_sequential())
}
