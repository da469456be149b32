//! `gen`: synthesize a corpus of images, label maps, and scene sidecars.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;

use densflow_core::labelio::save_label_map;
use densflow_core::synthgen::{
    generate_scene, sample_scene_suite, scene_statistics, ContrastPolarity, DensityClass, Layering,
    Morphology, SceneSpec, SceneStats, SizeLaw, SpatialDistribution, Texture,
};
use densflow_core::InstanceLabelMap;

use crate::manifest::RunManifest;
use crate::{usage, CmdResult, Failure};

#[derive(Debug, clap::Args)]
pub struct GenArgs {
    /// Corpus directory to create (images/, labels/, scenes/, manifest.json).
    #[arg(long)]
    out: PathBuf,
    /// Master seed; every scene seed derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Generate the balanced factorial suite instead of a single scene.
    #[arg(long)]
    suite: bool,
    /// Suite repetitions per density x morphology x layering combination.
    #[arg(long)]
    n_per_class: Option<usize>,
    /// Single scene: instance-count band.
    #[arg(long, value_enum)]
    density: Option<DensityArg>,
    /// Single scene: canvas height (density-dependent default).
    #[arg(long)]
    height: Option<usize>,
    /// Single scene: canvas width (density-dependent default).
    #[arg(long)]
    width: Option<usize>,
    /// Single scene: particle outline family.
    #[arg(long, value_enum)]
    morphology: Option<MorphArg>,
    /// Single scene: spatial arrangement of instance centers.
    #[arg(long, value_enum)]
    distribution: Option<DistArg>,
    /// Single scene: tiled (disjoint) or multilayer (z-stacked) placement.
    #[arg(long, value_enum)]
    layering: Option<LayeringArg>,
    /// Single scene: surface texture of the rendered image.
    #[arg(long, value_enum)]
    texture: Option<TextureArg>,
    /// Single scene: contrast polarity of the rendered image.
    #[arg(long, value_enum)]
    polarity: Option<PolarityArg>,
    /// Single scene: size law over equivalent diameter in px:
    /// lognormal:D,S (median D), uniform:A,B, or bimodal:D1,S1,D2,S2,P.
    #[arg(long)]
    size_law: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DensityArg {
    Sparse,
    Medium,
    High,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MorphArg {
    Sphere,
    Ellipse,
    Rod,
    Polygon,
    IrregularBlob,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DistArg {
    Random,
    UniformGrid,
    Clustered,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LayeringArg {
    Tiled,
    Multilayer,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TextureArg {
    Smooth,
    Noisy,
    Porous,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolarityArg {
    BrightOnDark,
    DarkOnBright,
}

impl DensityArg {
    fn core(self) -> DensityClass {
        match self {
            DensityArg::Sparse => DensityClass::Sparse,
            DensityArg::Medium => DensityClass::Medium,
            DensityArg::High => DensityClass::High,
        }
    }

    fn default_side(self) -> usize {
        match self {
            DensityArg::Sparse => 384,
            DensityArg::Medium => 512,
            DensityArg::High => 1024,
        }
    }

    fn default_law(self) -> &'static str {
        match self {
            DensityArg::Sparse => "lognormal:24,0.5",
            DensityArg::Medium => "lognormal:13,0.35",
            DensityArg::High => "lognormal:8.5,0.25",
        }
    }
}

pub fn run(args: GenArgs) -> CmdResult {
    let (specs, command) = plan(&args)?;
    let out = &args.out;
    for sub in ["images", "labels", "scenes"] {
        std::fs::create_dir_all(out.join(sub))
            .with_context(|| format!("creating {}", out.join(sub).display()))?;
    }

    let results: Vec<(usize, Result<_, _>)> = specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            let generated = generate_scene(spec).map(|(image, map)| {
                let stats = scene_statistics(&map);
                (image, map, stats)
            });
            (i, generated)
        })
        .collect();

    let mut manifest = RunManifest::new(command, Some(args.seed));
    let mut failures = 0usize;
    for (i, result) in results {
        let stem = format!("scene_{i:04}");
        match result {
            Ok((image, map, stats)) => {
                write_scene(out, &stem, &specs[i], &image.to_u8(), &map, &stats, &mut manifest)?;
            }
            Err(e) => {
                eprintln!("{stem}: {e}");
                failures += 1;
            }
        }
    }
    manifest.write(&out.join("manifest.json"))?;
    if failures > 0 {
        return Err(Failure::Data(anyhow::anyhow!(
            "{failures} of {} scenes could not be generated",
            specs.len()
        )));
    }
    Ok(())
}

fn plan(args: &GenArgs) -> Result<(Vec<SceneSpec>, String), Failure> {
    if args.suite {
        let scene_flags_given = args.density.is_some()
            || args.height.is_some()
            || args.width.is_some()
            || args.morphology.is_some()
            || args.distribution.is_some()
            || args.layering.is_some()
            || args.texture.is_some()
            || args.polarity.is_some()
            || args.size_law.is_some();
        if scene_flags_given {
            return Err(usage("single-scene flags cannot be combined with --suite"));
        }
        let n = args.n_per_class.unwrap_or(1);
        if n == 0 {
            return Err(usage("--n-per-class must be at least 1"));
        }
        let command = format!(
            "gen --suite --n-per-class {n} --seed {} --out {}",
            args.seed,
            args.out.display()
        );
        return Ok((sample_scene_suite(args.seed, n), command));
    }

    if args.n_per_class.is_some() {
        return Err(usage("--n-per-class requires --suite"));
    }
    let density = args.density.unwrap_or(DensityArg::Sparse);
    let height = args.height.unwrap_or_else(|| density.default_side());
    let width = args.width.unwrap_or_else(|| density.default_side());
    if height == 0 || width == 0 {
        return Err(usage("canvas dimensions must be positive"));
    }
    let law_text = args.size_law.clone().unwrap_or_else(|| density.default_law().to_string());
    let size_law = parse_size_law(&law_text).map_err(usage)?;
    let morphology = args.morphology.unwrap_or(MorphArg::Sphere);
    let distribution = args.distribution.unwrap_or(DistArg::Random);
    let layering = args.layering.unwrap_or(LayeringArg::Tiled);
    let texture = args.texture.unwrap_or(TextureArg::Smooth);
    let polarity = args.polarity.unwrap_or(PolarityArg::BrightOnDark);

    let spec = SceneSpec {
        height,
        width,
        morphology: match morphology {
            MorphArg::Sphere => Morphology::Sphere,
            MorphArg::Ellipse => Morphology::Ellipse,
            MorphArg::Rod => Morphology::Rod,
            MorphArg::Polygon => Morphology::Polygon,
            MorphArg::IrregularBlob => Morphology::IrregularBlob,
        },
        density_class: density.core(),
        distribution: match distribution {
            DistArg::Random => SpatialDistribution::Random,
            DistArg::UniformGrid => SpatialDistribution::UniformGrid,
            DistArg::Clustered => SpatialDistribution::Clustered,
        },
        layering: match layering {
            LayeringArg::Tiled => Layering::Tiled,
            LayeringArg::Multilayer => Layering::Multilayer,
        },
        size_law,
        texture: match texture {
            TextureArg::Smooth => Texture::Smooth,
            TextureArg::Noisy => Texture::Noisy,
            TextureArg::Porous => Texture::Porous,
        },
        contrast_polarity: match polarity {
            PolarityArg::BrightOnDark => ContrastPolarity::BrightOnDark,
            PolarityArg::DarkOnBright => ContrastPolarity::DarkOnBright,
        },
        seed: args.seed,
    };
    let command = format!(
        "gen --density {} --height {height} --width {width} --morphology {} \
         --distribution {} --layering {} --texture {} --polarity {} \
         --size-law {law_text} --seed {} --out {}",
        value_name(density),
        value_name(morphology),
        value_name(distribution),
        value_name(layering),
        value_name(texture),
        value_name(polarity),
        args.seed,
        args.out.display()
    );
    Ok((vec![spec], command))
}

fn value_name<V: ValueEnum>(v: V) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

/// Parses `lognormal:D,S` (D = median diameter px), `uniform:A,B`, or
/// `bimodal:D1,S1,D2,S2,P`.
fn parse_size_law(text: &str) -> Result<SizeLaw, String> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| format!("size law {text:?} must look like kind:params"))?;
    let nums: Result<Vec<f64>, _> = rest.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let nums = nums.map_err(|_| format!("size law {text:?} has non-numeric parameters"))?;
    let law = match (kind, nums.as_slice()) {
        ("lognormal", &[d, s]) if d > 0.0 && s >= 0.0 => SizeLaw::Lognormal { mu: d.ln(), sigma: s },
        ("uniform", &[a, b]) if 0.0 < a && a <= b => SizeLaw::Uniform { a, b },
        ("bimodal", &[d1, s1, d2, s2, p])
            if d1 > 0.0 && d2 > 0.0 && s1 >= 0.0 && s2 >= 0.0 && (0.0..=1.0).contains(&p) =>
        {
            SizeLaw::Bimodal { mu1: d1.ln(), sigma1: s1, mu2: d2.ln(), sigma2: s2, p }
        }
        _ => return Err(format!("size law {text:?} is malformed or out of range")),
    };
    Ok(law)
}

#[derive(Serialize)]
struct SceneSidecar<'a> {
    spec: &'a SceneSpec,
    stats: &'a SceneStats,
}

fn write_scene(
    out: &Path,
    stem: &str,
    spec: &SceneSpec,
    gray: &[u8],
    map: &InstanceLabelMap,
    stats: &SceneStats,
    manifest: &mut RunManifest,
) -> Result<(), Failure> {
    let image_path = out.join("images").join(format!("{stem}.png"));
    let buffer =
        image::GrayImage::from_raw(spec.width as u32, spec.height as u32, gray.to_vec())
            .expect("image buffer matches dims");
    buffer
        .save_with_format(&image_path, image::ImageFormat::Png)
        .with_context(|| format!("writing {}", image_path.display()))?;
    manifest.record_output(&image_path)?;

    let label_path = save_label_map(map, &out.join("labels"), stem)
        .with_context(|| format!("writing label map for {stem}"))?;
    manifest.record_output(&label_path)?;

    let scene_path = out.join("scenes").join(format!("{stem}.json"));
    let mut body = serde_json::to_string_pretty(&SceneSidecar { spec, stats })
        .context("serializing scene sidecar")?;
    body.push('\n');
    std::fs::write(&scene_path, body)
        .with_context(|| format!("writing {}", scene_path.display()))?;
    manifest.record_output(&scene_path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_law_grammar_round_trips() {
        assert!(matches!(
            parse_size_law("lognormal:24,0.5"),
            Ok(SizeLaw::Lognormal { .. })
        ));
        assert!(matches!(parse_size_law("uniform:90,200"), Ok(SizeLaw::Uniform { a, b } ) if a == 90.0 && b == 200.0));
        assert!(matches!(
            parse_size_law("bimodal:9,0.25,18,0.25,0.4"),
            Ok(SizeLaw::Bimodal { .. })
        ));
        for bad in [
            "lognormal",
            "lognormal:0,0.5",
            "uniform:5,2",
            "uniform:a,b",
            "bimodal:9,0.25",
            "gamma:1,2",
        ] {
            assert!(parse_size_law(bad).is_err(), "{bad} should be rejected");
        }
    }

    #[test]
    fn lognormal_parameter_is_median_diameter() {
        let Ok(SizeLaw::Lognormal { mu, sigma }) = parse_size_law("lognormal:24,0.5") else {
            panic!("parse failed");
        };
        assert!((mu - 24f64.ln()).abs() < 1e-12);
        assert_eq!(sigma, 0.5);
    }
}
