//! `render`: visualize a label map or field file as a PNG figure.

use std::path::PathBuf;

use anyhow::Context;

use densflow_core::labelio::load_label_map;
use densflow_core::predictor::FieldSource;
use densflow_core::resolve_fields;

use crate::manifest::RunManifest;
use crate::palette::{field_color, id_color};
use crate::{usage, CmdResult};

#[derive(Debug, clap::Args)]
pub struct RenderArgs {
    /// Label map (.png/.json) or field file (.uemf) to visualize.
    #[arg(long)]
    input: PathBuf,
    /// Output PNG path; a sibling manifest is written next to it.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: RenderArgs) -> CmdResult {
    let ext = args
        .input
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let (height, width, rgb) = match ext.as_str() {
        "png" | "json" => {
            let map = load_label_map(&args.input)?;
            let rgb: Vec<u8> =
                map.labels().iter().flat_map(|&id| id_color(id)).collect();
            (map.height(), map.width(), rgb)
        }
        "uemf" => {
            let field = resolve_fields(&FieldSource::File { path: args.input.clone() }, None)?;
            let n = field.height() * field.width();
            let mut rgb = Vec::with_capacity(3 * n);
            for i in 0..n {
                rgb.extend(field_color(field.flow_y()[i], field.flow_x()[i], field.prob()[i]));
            }
            (field.height(), field.width(), rgb)
        }
        _ => {
            return Err(usage(format!(
                "cannot render {:?}: expected a .png/.json label map or a .uemf field file",
                args.input
            )));
        }
    };

    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let buffer = image::RgbImage::from_raw(width as u32, height as u32, rgb)
        .expect("rgb buffer matches dims");
    buffer
        .save_with_format(&args.out, image::ImageFormat::Png)
        .with_context(|| format!("writing {}", args.out.display()))?;

    let command =
        format!("render --input {} --out {}", args.input.display(), args.out.display());
    let mut manifest = RunManifest::new(command, None);
    manifest.record_input(&args.input)?;
    manifest.record_output(&args.out)?;
    manifest.write(&args.out.with_extension("manifest.json"))?;
    Ok(())
}
