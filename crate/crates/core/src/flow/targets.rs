//! Supervision target construction.
//!
//! Each instance is turned into a center-pointing unit vector field by heat
//! diffusion: a unit source is injected at the instance medianoid every
//! iteration, heat is averaged over the 3x3 neighborhood restricted to the
//! instance support, and the normalized spatial gradient of the accumulated
//! energy gives the flow. Following the gradient uphill from any instance
//! pixel reaches the medianoid without leaving the instance, which is what
//! the decoder relies on.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::components::{label_connected_components, Connectivity};
use crate::flow::{FlowError, FlowField};
use crate::labelmap::InstanceLabelMap;

/// Medianoid of a pixel set: the member pixel closest in L1 distance to the
/// per-coordinate median. Always lies inside the set, even for concave
/// shapes. Ties resolve to the smallest `(row, col)`.
pub fn instance_center(pixels: &[(usize, usize)]) -> Result<(usize, usize), FlowError> {
    if pixels.is_empty() {
        return Err(FlowError::EmptyInstance);
    }
    let mut rows: Vec<usize> = pixels.iter().map(|&(r, _)| r).collect();
    let mut cols: Vec<usize> = pixels.iter().map(|&(_, c)| c).collect();
    rows.sort_unstable();
    cols.sort_unstable();
    let mid = |v: &[usize]| -> f64 {
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2] as f64
        } else {
            (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
        }
    };
    let (mr, mc) = (mid(&rows), mid(&cols));
    let mut best = (f64::INFINITY, (usize::MAX, usize::MAX));
    for &(r, c) in pixels {
        let d = (r as f64 - mr).abs() + (c as f64 - mc).abs();
        let key = (d, (r, c));
        if key < best {
            best = key;
        }
    }
    Ok(best.1)
}

/// Builds supervision targets for a label map.
///
/// Foreground pixels get a unit flow vector pointing up the diffusion energy
/// gradient of their instance (exactly zero at the instance center) and
/// probability 1; background pixels are zero in all three planes. Instances
/// with disconnected supports are diffused per four-connected part, each part
/// getting its own center.
pub fn compute_flow_targets(map: &InstanceLabelMap) -> FlowField {
    let (h, w) = (map.height(), map.width());
    let mut field = FlowField::new(h, w);
    for (i, &v) in map.labels().iter().enumerate() {
        if v != 0 {
            field.prob_mut()[i] = 1.0;
        }
    }

    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &v) in map.labels().iter().enumerate() {
        if v != 0 {
            groups.entry(v).or_default().push(i);
        }
    }
    let groups: Vec<Vec<usize>> = groups.into_values().collect();

    let per_instance: Vec<Vec<(usize, f32, f32)>> = groups
        .par_iter()
        .map(|pixels| instance_flows(w, pixels))
        .collect();

    for flows in per_instance {
        for (i, fy, fx) in flows {
            field.flow_y_mut()[i] = fy;
            field.flow_x_mut()[i] = fx;
        }
    }
    field
}

/// Flow vectors for one instance, as `(flat_index, flow_y, flow_x)` triples.
fn instance_flows(width: usize, pixels: &[usize]) -> Vec<(usize, f32, f32)> {
    let coords: Vec<(usize, usize)> = pixels.iter().map(|&i| (i / width, i % width)).collect();
    let r0 = coords.iter().map(|&(r, _)| r).min().expect("non-empty instance");
    let r1 = coords.iter().map(|&(r, _)| r).max().expect("non-empty instance");
    let c0 = coords.iter().map(|&(_, c)| c).min().expect("non-empty instance");
    let c1 = coords.iter().map(|&(_, c)| c).max().expect("non-empty instance");
    let (bh, bw) = (r1 - r0 + 1, c1 - c0 + 1);

    // Split the support into four-connected parts; a part diffuses from its
    // own medianoid, otherwise separated fragments would get no energy.
    let mut local_fg = vec![false; bh * bw];
    for &(r, c) in &coords {
        local_fg[(r - r0) * bw + (c - c0)] = true;
    }
    let parts = label_connected_components(bh, bw, &local_fg, Connectivity::Four);
    let mut by_part: BTreeMap<u32, Vec<(usize, usize)>> = BTreeMap::new();
    for &(r, c) in &coords {
        let part = parts.get(r - r0, c - c0);
        by_part.entry(part).or_default().push((r, c));
    }

    let mut out = Vec::with_capacity(pixels.len());
    for part_pixels in by_part.values() {
        part_flows(width, part_pixels, &mut out);
    }
    out
}

/// Diffusion and gradient for one connected part, appended to `out`.
fn part_flows(width: usize, pixels: &[(usize, usize)], out: &mut Vec<(usize, f32, f32)>) {
    let center = instance_center(pixels).expect("parts are non-empty");
    let r0 = pixels.iter().map(|&(r, _)| r).min().expect("non-empty part");
    let r1 = pixels.iter().map(|&(r, _)| r).max().expect("non-empty part");
    let c0 = pixels.iter().map(|&(_, c)| c).min().expect("non-empty part");
    let c1 = pixels.iter().map(|&(_, c)| c).max().expect("non-empty part");
    let (bh, bw) = (r1 - r0 + 1, c1 - c0 + 1);

    // One-pixel zero padding on all sides keeps the 3x3 stencil and the
    // central differences in bounds without branching.
    let pw = bw + 2;
    let local = |r: usize, c: usize| (r - r0 + 1) * pw + (c - c0 + 1);
    let locals: Vec<usize> = pixels.iter().map(|&(r, c)| local(r, c)).collect();
    let center_local = local(center.0, center.1);

    let n_diff = 2 * ((bh * bh + bw * bw) as f64).sqrt().ceil() as usize;
    let mut energy = vec![0.0f64; (bh + 2) * pw];
    let mut smoothed = vec![0.0f64; locals.len()];
    for _ in 0..n_diff {
        energy[center_local] += 1.0;
        for (k, &li) in locals.iter().enumerate() {
            let above = li - pw;
            let below = li + pw;
            smoothed[k] = (energy[above - 1]
                + energy[above]
                + energy[above + 1]
                + energy[li - 1]
                + energy[li]
                + energy[li + 1]
                + energy[below - 1]
                + energy[below]
                + energy[below + 1])
                / 9.0;
        }
        for (k, &li) in locals.iter().enumerate() {
            energy[li] = smoothed[k];
        }
    }

    for (&(r, c), &li) in pixels.iter().zip(&locals) {
        let flat = r * width + c;
        if (r, c) == center {
            out.push((flat, 0.0, 0.0));
            continue;
        }
        let gy = (energy[li + pw] - energy[li - pw]) / 2.0;
        let gx = (energy[li + 1] - energy[li - 1]) / 2.0;
        let norm = gy.hypot(gx);
        if norm == 0.0 {
            out.push((flat, 0.0, 0.0));
        } else {
            out.push((flat, (gy / norm) as f32, (gx / norm) as f32));
        }
    }
}
