//! `flows`: export flow and probability targets for a corpus of label maps.

use std::path::PathBuf;

use rayon::prelude::*;

use densflow_core::predictor::FieldSource;
use densflow_core::{resolve_fields, save_fields};

use crate::corpus::{list_by_extension, stem_of, LABEL_EXTS};
use crate::manifest::RunManifest;
use crate::{usage, CmdResult, Failure};

#[derive(Debug, clap::Args)]
pub struct FlowsArgs {
    /// Directory of ground-truth label maps (.png or .json).
    #[arg(long)]
    labels: PathBuf,
    /// Directory receiving one .uemf field file per label map.
    #[arg(long)]
    out: PathBuf,
    /// Gaussian perturbation strength; omit for exact oracle targets.
    #[arg(long)]
    sigma: Option<f64>,
    /// Seed for the perturbation noise (only used with --sigma).
    #[arg(long, default_value_t = 0)]
    noise_seed: u64,
}

pub fn run(args: FlowsArgs) -> CmdResult {
    if let Some(sigma) = args.sigma {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(usage(format!("--sigma must be finite and non-negative, got {sigma}")));
        }
    }
    let label_files = list_by_extension(&args.labels, &LABEL_EXTS)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| Failure::Data(anyhow::anyhow!("creating {}: {e}", args.out.display())))?;

    let outcomes: Vec<(PathBuf, PathBuf, Result<(), String>)> = label_files
        .par_iter()
        .map(|label_path| {
            let out_path = args.out.join(format!("{}.uemf", stem_of(label_path)));
            let source = match args.sigma {
                None => FieldSource::Oracle { labels: label_path.clone() },
                Some(sigma) => FieldSource::NoisyOracle {
                    labels: label_path.clone(),
                    sigma,
                    seed: args.noise_seed,
                },
            };
            let result = resolve_fields(&source, None)
                .and_then(|field| save_fields(&field, &out_path))
                .map_err(|e| e.to_string());
            (label_path.clone(), out_path, result)
        })
        .collect();

    let mut command = format!("flows --labels {} --out {}", args.labels.display(), args.out.display());
    if let Some(sigma) = args.sigma {
        command.push_str(&format!(" --sigma {sigma} --noise-seed {}", args.noise_seed));
    }
    let mut manifest = RunManifest::new(command, args.sigma.map(|_| args.noise_seed));
    let mut failures = 0usize;
    for (label_path, out_path, result) in &outcomes {
        match result {
            Ok(()) => {
                manifest.record_input(label_path)?;
                manifest.record_output(out_path)?;
            }
            Err(e) => {
                eprintln!("{}: {e}", label_path.display());
                failures += 1;
            }
        }
    }
    manifest.write(&args.out.join("manifest.json"))?;
    if failures > 0 {
        return Err(Failure::Data(anyhow::anyhow!(
            "{failures} of {} label maps could not be converted",
            outcomes.len()
        )));
    }
    Ok(())
}
