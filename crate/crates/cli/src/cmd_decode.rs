//! `decode`: turn flow field files into predicted instance label maps.

use std::path::PathBuf;

use anyhow::Context;

use densflow_core::labelio::save_label_map;
use densflow_core::predictor::FieldSource;
use densflow_core::{follow_flows, resolve_fields, DecodeParams};

use crate::corpus::{list_by_extension, stem_of};
use crate::manifest::RunManifest;
use crate::{usage, CmdResult, Failure};

#[derive(Debug, clap::Args)]
pub struct DecodeArgs {
    /// Directory of .uemf field files.
    #[arg(long)]
    fields: PathBuf,
    /// Directory receiving one predicted label map per field.
    #[arg(long)]
    out: PathBuf,
    /// Euler integration steps per pixel.
    #[arg(long)]
    niter: Option<u32>,
    /// Step length in pixels per iteration.
    #[arg(long)]
    step: Option<f32>,
    /// Foreground threshold on the probability plane, in (0, 1).
    #[arg(long)]
    prob_thresh: Option<f32>,
    /// Side length of the square sink histogram cells, in pixels.
    #[arg(long)]
    sink_bin: Option<u32>,
    /// Discard predicted instances smaller than this many pixels.
    #[arg(long)]
    min_size: Option<u32>,
}

pub fn run(args: DecodeArgs) -> CmdResult {
    let mut params = DecodeParams::default();
    if let Some(v) = args.niter {
        params.n_iter = v;
    }
    if let Some(v) = args.step {
        params.step_size = v;
    }
    if let Some(v) = args.prob_thresh {
        params.prob_threshold = v;
    }
    if let Some(v) = args.sink_bin {
        params.sink_bin = v;
    }
    if let Some(v) = args.min_size {
        params.min_size = v;
    }
    params.validate().map_err(|e| usage(e.to_string()))?;

    let field_files = list_by_extension(&args.fields, &["uemf"])?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    let command = format!(
        "decode --fields {} --out {} --niter {} --step {} --prob-thresh {} --sink-bin {} --min-size {}",
        args.fields.display(),
        args.out.display(),
        params.n_iter,
        params.step_size,
        params.prob_threshold,
        params.sink_bin,
        params.min_size
    );
    let mut manifest = RunManifest::new(command, None);
    let mut failures = 0usize;
    for field_path in &field_files {
        let stem = stem_of(field_path);
        let decoded = resolve_fields(&FieldSource::File { path: field_path.clone() }, None)
            .map_err(anyhow::Error::from)
            .and_then(|field| follow_flows(&field, &params).map_err(anyhow::Error::from))
            .and_then(|map| {
                save_label_map(&map, &args.out, &stem).map_err(anyhow::Error::from)
            });
        match decoded {
            Ok(out_path) => {
                manifest.record_input(field_path)?;
                manifest.record_output(&out_path)?;
            }
            Err(e) => {
                eprintln!("{}: {e:#}", field_path.display());
                failures += 1;
            }
        }
    }
    manifest.write(&args.out.join("manifest.json"))?;
    if failures > 0 {
        return Err(Failure::Data(anyhow::anyhow!(
            "{failures} of {} fields could not be decoded",
            field_files.len()
        )));
    }
    Ok(())
}
