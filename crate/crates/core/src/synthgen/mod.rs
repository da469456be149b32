//! Deterministic synthetic micrograph scenes.
//!
//! A [`SceneSpec`] pins every generator attribute: canvas size, particle
//! morphology, instance-count band, spatial distribution, layering mode,
//! size law over equivalent diameter, surface texture, contrast polarity,
//! and a seed. [`generate_scene`] maps a spec to a grayscale image and its
//! ground-truth label map, a pure function of the spec including all
//! randomness. The generator exists to stress the flow engine and metrics at
//! controlled densities, from a handful of particles to the thousands found
//! in crowded micrographs.

mod place;
mod render;
mod shapes;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labelmap::InstanceLabelMap;
use crate::rng::derive_seed;

/// Particle outline family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Morphology {
    Sphere,
    Ellipse,
    Rod,
    Polygon,
    IrregularBlob,
}

pub const MORPHOLOGIES: [Morphology; 5] = [
    Morphology::Sphere,
    Morphology::Ellipse,
    Morphology::Rod,
    Morphology::Polygon,
    Morphology::IrregularBlob,
];

/// Instance-count band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityClass {
    /// 1 to 99 instances.
    Sparse,
    /// 100 to 499 instances.
    Medium,
    /// 500 to 2500 instances.
    High,
}

pub const DENSITY_CLASSES: [DensityClass; 3] =
    [DensityClass::Sparse, DensityClass::Medium, DensityClass::High];

impl DensityClass {
    /// Inclusive instance-count band.
    pub fn band(self) -> (usize, usize) {
        match self {
            DensityClass::Sparse => (1, 99),
            DensityClass::Medium => (100, 499),
            DensityClass::High => (500, 2500),
        }
    }

    /// Band containing `n`, consistent with the metrics split at 100.
    pub fn of_count(n: usize) -> Self {
        if n < 100 {
            DensityClass::Sparse
        } else if n < 500 {
            DensityClass::Medium
        } else {
            DensityClass::High
        }
    }
}

/// Spatial arrangement of instance centers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialDistribution {
    Random,
    UniformGrid,
    Clustered,
}

/// Whether instances may overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layering {
    /// Disjoint masks; touching is allowed, overlap is not.
    Tiled,
    /// Z-stacked shapes; the label map keeps only top-most pixels.
    Multilayer,
}

pub const LAYERINGS: [Layering; 2] = [Layering::Tiled, Layering::Multilayer];

/// Size law over equivalent diameter in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeLaw {
    Lognormal { mu: f64, sigma: f64 },
    Uniform { a: f64, b: f64 },
    Bimodal { mu1: f64, sigma1: f64, mu2: f64, sigma2: f64, p: f64 },
}

/// Surface texture applied to the rendered image (labels are unaffected).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Texture {
    Smooth,
    Noisy,
    Porous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContrastPolarity {
    BrightOnDark,
    DarkOnBright,
}

/// Complete generator configuration for one scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub height: usize,
    pub width: usize,
    pub morphology: Morphology,
    pub density_class: DensityClass,
    pub distribution: SpatialDistribution,
    pub layering: Layering,
    pub size_law: SizeLaw,
    pub texture: Texture,
    pub contrast_polarity: ContrastPolarity,
    pub seed: u64,
}

/// Instance areas are clipped into this range, in pixels.
pub const AREA_RANGE: (f64, f64) = (10.0, 1e5);

/// Log-decade area histogram edges.
pub const AREA_BIN_EDGES: [f64; 5] = [10.0, 1e2, 1e3, 1e4, 1e5];

/// Summary statistics of a scene's label map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneStats {
    pub n_instances: usize,
    /// Counts per log-decade bin of [`AREA_BIN_EDGES`]; areas outside the
    /// range land in the boundary bins so the mass always equals
    /// `n_instances`.
    pub area_histogram: Vec<u64>,
    pub density_class: DensityClass,
}

/// Grayscale image in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneImage {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<f32>,
}

impl SceneImage {
    /// Quantizes to 8-bit grayscale.
    pub fn to_u8(&self) -> Vec<u8> {
        self.pixels.iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect()
    }
}

/// One placed shape, including pixels later hidden by higher layers.
#[derive(Debug, Clone)]
pub struct PlacedShape {
    pub id: u32,
    /// Stacking order; higher z wins visibility.
    pub z: usize,
    pub center: (i32, i32),
    /// Farthest offset from the center, for shading falloff.
    pub radius: f64,
    /// Flat pixel indices of the full mask.
    pub pixels: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("placed only {placed} of {requested} instances before exhausting retries")]
    InfeasibleSpec { placed: usize, requested: usize },
    #[error("invalid scene spec: {0}")]
    InvalidSpec(&'static str),
}

impl SceneSpec {
    /// Checks parameter sanity (positive dims, well-formed size law).
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.height == 0 || self.width == 0 {
            return Err(SynthError::InvalidSpec("canvas dimensions must be positive"));
        }
        match self.size_law {
            SizeLaw::Lognormal { mu, sigma } => {
                if !mu.is_finite() || !sigma.is_finite() || sigma < 0.0 {
                    return Err(SynthError::InvalidSpec("lognormal parameters out of range"));
                }
            }
            SizeLaw::Uniform { a, b } => {
                if !(a.is_finite() && b.is_finite() && 0.0 < a && a <= b) {
                    return Err(SynthError::InvalidSpec("uniform bounds must satisfy 0 < a <= b"));
                }
            }
            SizeLaw::Bimodal { mu1, sigma1, mu2, sigma2, p } => {
                let finite =
                    mu1.is_finite() && sigma1.is_finite() && mu2.is_finite() && sigma2.is_finite();
                if !finite || sigma1 < 0.0 || sigma2 < 0.0 || !(0.0..=1.0).contains(&p) {
                    return Err(SynthError::InvalidSpec("bimodal parameters out of range"));
                }
            }
        }
        Ok(())
    }
}

impl SizeLaw {
    /// Draws an equivalent diameter.
    fn sample_diameter<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            SizeLaw::Lognormal { mu, sigma } => {
                rand_distr::LogNormal::new(mu, sigma).expect("validated").sample(rng)
            }
            SizeLaw::Uniform { a, b } => rng.random_range(a..=b),
            SizeLaw::Bimodal { mu1, sigma1, mu2, sigma2, p } => {
                if rng.random::<f64>() < p {
                    rand_distr::LogNormal::new(mu1, sigma1).expect("validated").sample(rng)
                } else {
                    rand_distr::LogNormal::new(mu2, sigma2).expect("validated").sample(rng)
                }
            }
        }
    }

    /// Expected instance area implied by the law, clipped to [`AREA_RANGE`].
    ///
    /// For a diameter D the area is pi/4 D^2, so the mean area needs E[D^2]:
    /// exp(2 mu + 2 sigma^2) for a lognormal, (a^2 + ab + b^2)/3 for a
    /// uniform law.
    fn mean_area(&self) -> f64 {
        let e_d2 = match *self {
            SizeLaw::Lognormal { mu, sigma } => (2.0 * mu + 2.0 * sigma * sigma).exp(),
            SizeLaw::Uniform { a, b } => (a * a + a * b + b * b) / 3.0,
            SizeLaw::Bimodal { mu1, sigma1, mu2, sigma2, p } => {
                p * (2.0 * mu1 + 2.0 * sigma1 * sigma1).exp()
                    + (1.0 - p) * (2.0 * mu2 + 2.0 * sigma2 * sigma2).exp()
            }
        };
        (std::f64::consts::FRAC_PI_4 * e_d2).clamp(AREA_RANGE.0, AREA_RANGE.1)
    }
}

/// Fraction of the canvas the expected total instance area may occupy when
/// adapting the instance count to the canvas; overlap allows a higher fill.
fn fill_limit(layering: Layering) -> f64 {
    match layering {
        Layering::Tiled => 0.30,
        Layering::Multilayer => 0.45,
    }
}

/// Generates a scene: grayscale image plus ground-truth label map.
pub fn generate_scene(spec: &SceneSpec) -> Result<(SceneImage, InstanceLabelMap), SynthError> {
    let (image, map, _) = generate_scene_full(spec)?;
    Ok((image, map))
}

/// Like [`generate_scene`], additionally returning per-shape placement
/// records (full masks and z order) for tests and diagnostics.
pub fn generate_scene_full(
    spec: &SceneSpec,
) -> Result<(SceneImage, InstanceLabelMap, Vec<PlacedShape>), SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, 0xD5CE));

    // Adapt the instance count to what the canvas can plausibly hold, then
    // draw it uniformly within the density band.
    let (band_lo, band_hi) = spec.density_class.band();
    let capacity = (fill_limit(spec.layering) * (spec.height * spec.width) as f64
        / spec.size_law.mean_area()) as usize;
    let hi = band_hi.min(band_lo.max(capacity));
    let n = rng.random_range(band_lo..=hi);

    // Draw all shape geometry up front; placement caps oversized shapes to
    // the canvas and claims space largest-first.
    let protos: Vec<shapes::ShapeProto> =
        (0..n).map(|_| shapes::ShapeProto::sample(spec.morphology, &spec.size_law, &mut rng)).collect();

    let placed = place::place_shapes(spec, &protos, &mut rng)?;
    let map = place::label_map_of(spec, &placed);
    let image = render::render_image(spec, &map, &placed, &mut rng);
    Ok((image, map, placed))
}

/// Computes count, log-binned area histogram, and the derived density label.
pub fn scene_statistics(map: &InstanceLabelMap) -> SceneStats {
    let areas = map.instance_areas();
    let mut hist = vec![0u64; AREA_BIN_EDGES.len() - 1];
    for &a in areas.values() {
        let a = a as f64;
        let mut bin = 0;
        while bin + 2 < AREA_BIN_EDGES.len() && a >= AREA_BIN_EDGES[bin + 1] {
            bin += 1;
        }
        hist[bin] += 1;
    }
    SceneStats {
        n_instances: areas.len(),
        area_histogram: hist,
        density_class: DensityClass::of_count(areas.len()),
    }
}

/// Builds a balanced factorial suite over density x morphology x layering.
///
/// Each combination appears `n_per_class` times with a distinct derived seed;
/// the remaining attributes cycle deterministically so the suite exercises
/// every distribution, texture, and polarity.
pub fn sample_scene_suite(master_seed: u64, n_per_class: usize) -> Vec<SceneSpec> {
    assert!(n_per_class >= 1, "n_per_class must be at least 1");
    let distributions = [
        SpatialDistribution::Random,
        SpatialDistribution::UniformGrid,
        SpatialDistribution::Clustered,
    ];
    let textures = [Texture::Smooth, Texture::Noisy, Texture::Porous];
    let mut specs = Vec::new();
    let mut index = 0u64;
    for _ in 0..n_per_class {
        for &density_class in &DENSITY_CLASSES {
            for (mi, &morphology) in MORPHOLOGIES.iter().enumerate() {
                for &layering in &LAYERINGS {
                    // Canvas and law per density band, sized so the band is
                    // reachable at the configured fill limit. Sparse scenes
                    // alternate between many small and a few large particles
                    // to cover the full area spread.
                    let (height, width, size_law) = match density_class {
                        DensityClass::Sparse => {
                            if mi % 2 == 0 {
                                (384, 384, SizeLaw::Lognormal { mu: 24f64.ln(), sigma: 0.5 })
                            } else {
                                (512, 512, SizeLaw::Uniform { a: 90.0, b: 200.0 })
                            }
                        }
                        DensityClass::Medium => {
                            if mi % 2 == 0 {
                                (512, 512, SizeLaw::Lognormal { mu: 13f64.ln(), sigma: 0.35 })
                            } else {
                                (
                                    512,
                                    512,
                                    SizeLaw::Bimodal {
                                        mu1: 9f64.ln(),
                                        sigma1: 0.25,
                                        mu2: 18f64.ln(),
                                        sigma2: 0.25,
                                        p: 0.4,
                                    },
                                )
                            }
                        }
                        DensityClass::High => {
                            (1024, 1024, SizeLaw::Lognormal { mu: 8.5f64.ln(), sigma: 0.25 })
                        }
                    };
                    specs.push(SceneSpec {
                        height,
                        width,
                        morphology,
                        density_class,
                        distribution: distributions[index as usize % 3],
                        layering,
                        size_law,
                        texture: textures[(index / 3) as usize % 3],
                        contrast_polarity: if index % 2 == 0 {
                            ContrastPolarity::BrightOnDark
                        } else {
                            ContrastPolarity::DarkOnBright
                        },
                        seed: derive_seed(master_seed, index),
                    });
                    index += 1;
                }
            }
        }
    }
    specs
}
