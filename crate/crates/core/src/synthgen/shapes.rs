//! Shape sampling and rasterization.
//!
//! A shape prototype fixes geometry (family parameters and target area)
//! before placement, so placement retries reposition the same shape instead
//! of redrawing it. Rasterization tests pixel centers against an implicit
//! inside predicate, then keeps the largest four-connected component and
//! grows the target area until at least the minimum renderable 10 pixels
//! survive.

use rand::Rng;

use crate::components::{label_connected_components, Connectivity};
use crate::synthgen::{Morphology, SizeLaw, AREA_RANGE};

/// Minimum pixels any rasterized shape must contain.
pub(crate) const MIN_SHAPE_PIXELS: usize = 10;

#[derive(Debug, Clone)]
enum Kind {
    Disc,
    Ellipse { aspect: f64, theta: f64 },
    Rod { aspect: f64, theta: f64 },
    Polygon { sides: u32, theta: f64 },
    Blob { amps: [f64; 4], phases: [f64; 4], aspect: f64, theta: f64 },
}

/// Sampled shape geometry awaiting placement.
#[derive(Debug, Clone)]
pub(crate) struct ShapeProto {
    pub area_target: f64,
    kind: Kind,
}

impl ShapeProto {
    /// Draws geometry for one instance from the spec's law and morphology.
    ///
    /// The equivalent diameter is capped to the canvas so the fully-inside
    /// placement constraint stays satisfiable.
    pub fn sample<R: Rng>(morphology: Morphology, law: &SizeLaw, rng: &mut R) -> Self {
        let kind = match morphology {
            Morphology::Sphere => Kind::Disc,
            Morphology::Ellipse => Kind::Ellipse {
                aspect: rng.random_range(1.3..3.0),
                theta: rng.random_range(0.0..std::f64::consts::PI),
            },
            Morphology::Rod => Kind::Rod {
                aspect: rng.random_range(3.0..8.0),
                theta: rng.random_range(0.0..std::f64::consts::PI),
            },
            Morphology::Polygon => Kind::Polygon {
                sides: rng.random_range(5..=8),
                theta: rng.random_range(0.0..std::f64::consts::TAU),
            },
            Morphology::IrregularBlob => {
                let mut amps = [0.0; 4];
                let mut phases = [0.0; 4];
                for m in 0..4 {
                    amps[m] = rng.random_range(0.0..0.45 / (m + 2) as f64);
                    phases[m] = rng.random_range(0.0..std::f64::consts::TAU);
                }
                Kind::Blob {
                    amps,
                    phases,
                    aspect: rng.random_range(1.0..1.8),
                    theta: rng.random_range(0.0..std::f64::consts::PI),
                }
            }
        };
        let d = law.sample_diameter(rng);
        let area = (std::f64::consts::FRAC_PI_4 * d * d).clamp(AREA_RANGE.0, AREA_RANGE.1);
        Self { area_target: area, kind }
    }

    /// Caps the target area so the shape's extent fits a canvas.
    pub fn cap_to_canvas(&mut self, height: usize, width: usize) {
        let cap = height.min(width).saturating_sub(4).max(4) as f64;
        let max_area = match self.kind {
            // Worst-case linear extent per unit sqrt(area), inverted.
            Kind::Disc => std::f64::consts::FRAC_PI_4 * cap * cap,
            Kind::Ellipse { aspect, .. } => std::f64::consts::FRAC_PI_4 * cap * cap / (aspect * 1.6),
            // Harmonic modulation can push the boundary out to ~1.6x the
            // base radius on top of the stretch.
            Kind::Blob { aspect, .. } => std::f64::consts::FRAC_PI_4 * cap * cap / (aspect * 2.6),
            Kind::Rod { aspect, .. } => {
                let rho = cap / (2.0 * aspect);
                rho * rho * (4.0 * (aspect - 1.0) + std::f64::consts::PI)
            }
            Kind::Polygon { .. } => cap * cap / 2.0,
        };
        self.area_target = self.area_target.min(max_area.max(AREA_RANGE.0));
    }

    /// Rasterizes to offsets around the shape center, four-connected, at
    /// least [`MIN_SHAPE_PIXELS`] large.
    pub fn rasterize(&self) -> Vec<(i32, i32)> {
        let mut area = self.area_target;
        for _ in 0..32 {
            let offsets = rasterize_once(&self.kind, area);
            if offsets.len() >= MIN_SHAPE_PIXELS {
                return offsets;
            }
            area *= 1.25;
        }
        rasterize_once(&self.kind, area)
    }
}

fn rasterize_once(kind: &Kind, area: f64) -> Vec<(i32, i32)> {
    let (inside, extent): (Box<dyn Fn(f64, f64) -> bool>, f64) = predicate(kind, area);
    let half = extent.ceil() as i32 + 1;
    let side = (2 * half + 1) as usize;
    let mut grid = vec![false; side * side];
    for dy in -half..=half {
        for dx in -half..=half {
            if inside(dy as f64, dx as f64) {
                grid[(dy + half) as usize * side + (dx + half) as usize] = true;
            }
        }
    }
    // Concave families can pinch off satellite pixels; keep the main body.
    let comps = label_connected_components(side, side, &grid, Connectivity::Four);
    let areas = comps.instance_areas();
    let Some((&main, _)) = areas.iter().max_by_key(|&(&id, &a)| (a, std::cmp::Reverse(id))) else {
        return vec![(0, 0)];
    };
    let mut offsets = Vec::new();
    for dy in -half..=half {
        for dx in -half..=half {
            if comps.get((dy + half) as usize, (dx + half) as usize) == main {
                offsets.push((dy, dx));
            }
        }
    }
    offsets
}

/// Builds the inside predicate and a conservative half-extent for a kind at
/// a given area.
fn predicate(kind: &Kind, area: f64) -> (Box<dyn Fn(f64, f64) -> bool>, f64) {
    match *kind {
        Kind::Disc => {
            let r2 = area / std::f64::consts::PI;
            (Box::new(move |dy, dx| dy * dy + dx * dx <= r2), r2.sqrt())
        }
        Kind::Ellipse { aspect, theta } => {
            // Area-preserving stretch of a disc: unit determinant keeps the
            // analytic area exact for any aspect.
            let r2 = area / std::f64::consts::PI;
            let s = aspect.sqrt();
            let (sin, cos) = theta.sin_cos();
            (
                Box::new(move |dy, dx| {
                    let u = (cos * dx + sin * dy) / s;
                    let v = (-sin * dx + cos * dy) * s;
                    u * u + v * v <= r2
                }),
                r2.sqrt() * s,
            )
        }
        Kind::Rod { aspect, theta } => {
            // Capsule: segment of half-length hs with radius rho; thin rods
            // are widened to at least 3 px so they rasterize connected.
            let aspect = effective_rod_aspect(aspect, area);
            let rho = (area / (4.0 * (aspect - 1.0) + std::f64::consts::PI)).sqrt();
            let hs = rho * (aspect - 1.0);
            let rho2 = rho * rho;
            let (sin, cos) = theta.sin_cos();
            (
                Box::new(move |dy, dx| {
                    let u = cos * dx + sin * dy;
                    let v = -sin * dx + cos * dy;
                    let du = (u.abs() - hs).max(0.0);
                    du * du + v * v <= rho2
                }),
                hs + rho,
            )
        }
        Kind::Polygon { sides, theta } => {
            let n = sides as f64;
            let circum = (2.0 * area / (n * (std::f64::consts::TAU / n).sin())).sqrt();
            let apothem = circum * (std::f64::consts::PI / n).cos();
            (
                Box::new(move |dy, dx| {
                    for k in 0..sides {
                        let alpha = theta + (2 * k + 1) as f64 * std::f64::consts::PI / n;
                        if dx * alpha.cos() + dy * alpha.sin() > apothem {
                            return false;
                        }
                    }
                    true
                }),
                circum,
            )
        }
        Kind::Blob { amps, phases, aspect, theta } => {
            // Radius modulated by band-limited harmonics m = 2..5 on top of
            // an area-preserving anisotropic stretch. The base radius is
            // normalized numerically so the enclosed area matches.
            let modulation = move |phi: f64| -> f64 {
                let mut m = 1.0;
                for (j, (&a, &psi)) in amps.iter().zip(&phases).enumerate() {
                    m += a * ((j + 2) as f64 * phi + psi).cos();
                }
                m.max(0.35)
            };
            let samples = 512;
            let integral: f64 = (0..samples)
                .map(|i| {
                    let phi = std::f64::consts::TAU * i as f64 / samples as f64;
                    modulation(phi).powi(2)
                })
                .sum::<f64>()
                * std::f64::consts::TAU
                / samples as f64;
            let base_r = (2.0 * area / integral).sqrt();
            let s = aspect.sqrt();
            let (sin, cos) = theta.sin_cos();
            let max_mod = 1.0 + amps.iter().sum::<f64>();
            (
                Box::new(move |dy, dx| {
                    let u = (cos * dx + sin * dy) / s;
                    let v = (-sin * dx + cos * dy) * s;
                    let r2 = u * u + v * v;
                    let rho = base_r * modulation(v.atan2(u));
                    r2 <= rho * rho
                }),
                base_r * max_mod * s,
            )
        }
    }
}

/// Thin capsules disconnect when their width drops below ~3 px; lower the
/// aspect so the radius stays at least 1.5 px.
fn effective_rod_aspect(aspect: f64, area: f64) -> f64 {
    let widest_ok = 1.0 + (area / 2.25 - std::f64::consts::PI) / 4.0;
    aspect.min(widest_ok).max(1.2)
}
