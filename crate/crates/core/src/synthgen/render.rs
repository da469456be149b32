//! Grayscale rendering of placed scenes.
//!
//! Rendering only ever touches the image: label maps are fixed by placement,
//! so textures and noise cannot change the ground truth. Per-instance levels
//! and porous holes come from the scene's sequential generator stream, while
//! pixel-addressed speckle and sensor noise use counter-based draws keyed by
//! derived seeds.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::labelmap::InstanceLabelMap;
use crate::rng::{counter_normal, derive_seed};
use crate::synthgen::{ContrastPolarity, PlacedShape, SceneImage, SceneSpec, Texture};

/// Per-instance brightness jitter around the foreground level.
const LEVEL_JITTER: f64 = 0.08;
/// Fraction of the level-to-background gap recovered at the shape rim.
const RIM_FALLOFF: f64 = 0.35;
/// Speckle amplitude for the noisy texture.
const SPECKLE: f64 = 0.06;
/// Global additive sensor noise, applied to every pixel.
const SENSOR_NOISE: f64 = 0.02;

fn levels(polarity: ContrastPolarity) -> (f64, f64) {
    match polarity {
        ContrastPolarity::BrightOnDark => (0.15, 0.72),
        ContrastPolarity::DarkOnBright => (0.85, 0.30),
    }
}

/// Renders the scene image for a placed, labeled scene.
pub(crate) fn render_image(
    spec: &SceneSpec,
    map: &InstanceLabelMap,
    placed: &[PlacedShape],
    rng: &mut ChaCha8Rng,
) -> SceneImage {
    let (bg, fg) = levels(spec.contrast_polarity);
    let w = spec.width;
    let mut pixels = vec![bg; spec.height * w];
    let labels = map.labels();
    let speckle_seed = derive_seed(spec.seed, 0x7EC5);
    let sensor_seed = derive_seed(spec.seed, 0x5E15);

    for shape in placed {
        let level = fg + rng.random_range(-LEVEL_JITTER..LEVEL_JITTER);
        for &i in &shape.pixels {
            if labels[i] != shape.id {
                continue;
            }
            let (y, x) = ((i / w) as f64, (i % w) as f64);
            let dy = y - shape.center.0 as f64;
            let dx = x - shape.center.1 as f64;
            let t = ((dy * dy + dx * dx).sqrt() / shape.radius).min(1.0);
            let mut v = level + RIM_FALLOFF * t * (bg - level);
            if spec.texture == Texture::Noisy {
                v += SPECKLE * counter_normal(speckle_seed, i as u64, shape.id as u64);
            }
            pixels[i] = v;
        }
        if spec.texture == Texture::Porous {
            carve_holes(&mut pixels, labels, shape, bg, w, rng);
        }
    }

    for (i, v) in pixels.iter_mut().enumerate() {
        *v += SENSOR_NOISE * counter_normal(sensor_seed, i as u64, 0);
        *v = v.clamp(0.0, 1.0);
    }
    SceneImage {
        height: spec.height,
        width: spec.width,
        pixels: pixels.into_iter().map(|v| v as f32).collect(),
    }
}

/// Blends small discs inside one shape most of the way toward the
/// background. Holes live in the image only; the label map keeps the full
/// mask.
fn carve_holes(
    pixels: &mut [f64],
    labels: &[u32],
    shape: &PlacedShape,
    bg: f64,
    w: usize,
    rng: &mut ChaCha8Rng,
) {
    let n_holes = (shape.pixels.len() / 40).clamp(1, 12);
    for _ in 0..n_holes {
        let anchor = shape.pixels[rng.random_range(0..shape.pixels.len())];
        let (hy, hx) = ((anchor / w) as f64, (anchor % w) as f64);
        let r = rng.random_range(1.0..2.5);
        let r2 = r * r;
        for &i in &shape.pixels {
            if labels[i] != shape.id {
                continue;
            }
            let dy = (i / w) as f64 - hy;
            let dx = (i % w) as f64 - hx;
            if dy * dy + dx * dx <= r2 {
                pixels[i] = pixels[i] + 0.8 * (bg - pixels[i]);
            }
        }
    }
}
