//! Shape placement: position sampling, collision rules, z-ordering.
//!
//! Placement is sequential and order-dependent (each accepted shape changes
//! the collision state), so a scene is generated on one thread; determinism
//! comes from the spec's seed. Each shape gets a bounded number of position
//! attempts before the scene is declared infeasible.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use crate::labelmap::InstanceLabelMap;
use crate::synthgen::shapes::{ShapeProto, MIN_SHAPE_PIXELS};
use crate::synthgen::{Layering, PlacedShape, SceneSpec, SpatialDistribution, SynthError};

const MAX_ATTEMPTS: usize = 10_000;
/// Attempt index after which structured samplers fall back to uniform
/// positions; keeps crowded grid/cluster layouts from starving while the
/// attempt budget lasts.
const RESCUE_ATTEMPT: usize = 7_500;

enum Sampler {
    Random,
    Grid { rows: usize, cols: usize },
    Clustered { centers: Vec<(f64, f64)>, sigma: f64 },
}

impl Sampler {
    fn new(spec: &SceneSpec, n: usize, rng: &mut ChaCha8Rng) -> Self {
        let (h, w) = (spec.height as f64, spec.width as f64);
        match spec.distribution {
            SpatialDistribution::Random => Sampler::Random,
            SpatialDistribution::UniformGrid => {
                let rows = ((n as f64 * h / w).sqrt().ceil() as usize).max(1);
                let cols = n.div_ceil(rows).max(1);
                Sampler::Grid { rows, cols }
            }
            SpatialDistribution::Clustered => {
                let k = ((n as f64).sqrt().ceil() as usize).max(1);
                let centers = (0..k)
                    .map(|_| {
                        (
                            rng.random_range(0.15 * h..0.85 * h),
                            rng.random_range(0.15 * w..0.85 * w),
                        )
                    })
                    .collect();
                let sigma = h.min(w) / (3.0 * (k as f64).sqrt());
                Sampler::Clustered { centers, sigma }
            }
        }
    }

    fn sample(&self, spec: &SceneSpec, shape_index: usize, attempt: usize, rng: &mut ChaCha8Rng) -> (i32, i32) {
        let (h, w) = (spec.height, spec.width);
        if attempt >= RESCUE_ATTEMPT || matches!(self, Sampler::Random) {
            return (
                rng.random_range(0..h as i32),
                rng.random_range(0..w as i32),
            );
        }
        match self {
            Sampler::Random => unreachable!("handled above"),
            Sampler::Grid { rows, cols } => {
                let cell = shape_index % (rows * cols);
                let (r, c) = (cell / cols, cell % cols);
                let cell_h = h as f64 / *rows as f64;
                let cell_w = w as f64 / *cols as f64;
                let cy = (r as f64 + 0.5) * cell_h + rng.random_range(-cell_h / 3.0..cell_h / 3.0);
                let cx = (c as f64 + 0.5) * cell_w + rng.random_range(-cell_w / 3.0..cell_w / 3.0);
                (cy.round() as i32, cx.round() as i32)
            }
            Sampler::Clustered { centers, sigma } => {
                let &(cy, cx) = &centers[rng.random_range(0..centers.len())];
                let normal = rand_distr::Normal::new(0.0, *sigma).expect("finite sigma");
                (
                    (cy + normal.sample(rng)).round() as i32,
                    (cx + normal.sample(rng)).round() as i32,
                )
            }
        }
    }
}

/// Places every prototype, largest first, returning the accepted shapes with
/// their z order (placement index; later shapes stack on top).
pub(crate) fn place_shapes(
    spec: &SceneSpec,
    protos: &[ShapeProto],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<PlacedShape>, SynthError> {
    let (h, w) = (spec.height as i32, spec.width as i32);
    let n = protos.len();

    let mut capped: Vec<ShapeProto> = protos.to_vec();
    for p in &mut capped {
        p.cap_to_canvas(spec.height, spec.width);
    }
    capped.sort_by(|a, b| b.area_target.partial_cmp(&a.area_target).expect("finite areas"));
    let rasterized: Vec<Vec<(i32, i32)>> = capped.iter().map(|p| p.rasterize()).collect();

    let sampler = Sampler::new(spec, n, rng);
    let mut top = vec![0u32; spec.height * spec.width];
    let mut visible: Vec<usize> = vec![0; n + 1];
    let mut placed: Vec<PlacedShape> = Vec::with_capacity(n);

    for (z, offsets) in rasterized.iter().enumerate() {
        let id = (z + 1) as u32;
        let mut accepted = false;
        'attempts: for attempt in 0..MAX_ATTEMPTS {
            let (cy, cx) = sampler.sample(spec, z, attempt, rng);
            for &(dy, dx) in offsets {
                let (y, x) = (cy + dy, cx + dx);
                if y < 0 || y >= h || x < 0 || x >= w {
                    continue 'attempts;
                }
            }
            match spec.layering {
                Layering::Tiled => {
                    for &(dy, dx) in offsets {
                        let i = (cy + dy) as usize * spec.width + (cx + dx) as usize;
                        if top[i] != 0 {
                            continue 'attempts;
                        }
                    }
                }
                Layering::Multilayer => {
                    // Every shape this one would cover must keep at least
                    // the minimum renderable pixel count visible.
                    let mut covered: std::collections::BTreeMap<u32, usize> =
                        std::collections::BTreeMap::new();
                    for &(dy, dx) in offsets {
                        let i = (cy + dy) as usize * spec.width + (cx + dx) as usize;
                        if top[i] != 0 {
                            *covered.entry(top[i]).or_insert(0) += 1;
                        }
                    }
                    for (&other, &count) in &covered {
                        if visible[other as usize] - count < MIN_SHAPE_PIXELS {
                            continue 'attempts;
                        }
                    }
                }
            }

            let mut pixels = Vec::with_capacity(offsets.len());
            let mut radius2 = 0.0f64;
            for &(dy, dx) in offsets {
                let i = (cy + dy) as usize * spec.width + (cx + dx) as usize;
                if top[i] != 0 {
                    visible[top[i] as usize] -= 1;
                }
                top[i] = id;
                pixels.push(i);
                radius2 = radius2.max((dy * dy + dx * dx) as f64);
            }
            visible[id as usize] = pixels.len();
            placed.push(PlacedShape {
                id,
                z,
                center: (cy, cx),
                radius: radius2.sqrt().max(1.0),
                pixels,
            });
            accepted = true;
            break;
        }
        if !accepted {
            return Err(SynthError::InfeasibleSpec { placed: z, requested: n });
        }
    }
    Ok(placed)
}

/// Paints the ground-truth label map: shapes in ascending z, later shapes
/// overwriting, so a pixel's label is the top-most shape covering it.
pub(crate) fn label_map_of(spec: &SceneSpec, placed: &[PlacedShape]) -> InstanceLabelMap {
    let mut map = InstanceLabelMap::new(spec.height, spec.width);
    let labels = map.labels_mut();
    for shape in placed {
        for &i in &shape.pixels {
            labels[i] = shape.id;
        }
    }
    map
}
