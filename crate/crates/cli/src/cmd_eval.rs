//! `eval`: score predicted label maps against ground truth.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Context;
use rayon::prelude::*;

use densflow_core::evaluate_dataset;
use densflow_core::labelio::load_label_map;
use densflow_core::InstanceLabelMap;

use crate::corpus::{by_stem, list_by_extension, LABEL_EXTS};
use crate::manifest::RunManifest;
use crate::{usage, CmdResult, Failure};

#[derive(Debug, clap::Args)]
pub struct EvalArgs {
    /// Directory of ground-truth label maps.
    #[arg(long)]
    gt: PathBuf,
    /// Directory of predicted label maps.
    #[arg(long)]
    pred: PathBuf,
    /// IoU matching threshold, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    iou: f64,
    /// Also write the JSON report (plus a sibling manifest) to this path.
    #[arg(long)]
    report: Option<PathBuf>,
}

pub fn run(args: EvalArgs) -> CmdResult {
    if !(args.iou > 0.0 && args.iou < 1.0) {
        return Err(usage(format!("--iou must lie strictly between 0 and 1, got {}", args.iou)));
    }
    let gt_files = list_by_extension(&args.gt, &LABEL_EXTS)?;
    let pred_files = list_by_extension(&args.pred, &LABEL_EXTS)?;
    let gt_maps = load_dir(&gt_files)?;
    let pred_maps = load_dir(&pred_files)?;

    let report = evaluate_dataset(&gt_maps, &pred_maps, args.iou)?;
    let json = report.to_json();
    println!("{json}");

    if let Some(report_path) = &args.report {
        if let Some(parent) = report_path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
        std::fs::write(report_path, format!("{json}\n"))
            .with_context(|| format!("writing {}", report_path.display()))?;
        let command = format!(
            "eval --gt {} --pred {} --iou {} --report {}",
            args.gt.display(),
            args.pred.display(),
            args.iou,
            report_path.display()
        );
        let mut manifest = RunManifest::new(command, None);
        for path in gt_files.iter().chain(&pred_files) {
            manifest.record_input(path)?;
        }
        manifest.record_output(report_path)?;
        manifest.write(&report_path.with_extension("manifest.json"))?;
    }
    Ok(())
}

fn load_dir(files: &[PathBuf]) -> Result<BTreeMap<String, InstanceLabelMap>, Failure> {
    let paired = by_stem(files.to_vec())?;
    let loaded: Vec<(String, Result<InstanceLabelMap, _>)> = paired
        .par_iter()
        .map(|(stem, path)| (stem.clone(), load_label_map(path)))
        .collect();
    let mut maps = BTreeMap::new();
    let mut failures = 0usize;
    for (stem, result) in loaded {
        match result {
            Ok(map) => {
                maps.insert(stem, map);
            }
            Err(e) => {
                eprintln!("{e}");
                failures += 1;
            }
        }
    }
    if failures > 0 {
        return Err(Failure::Data(anyhow::anyhow!("{failures} label maps could not be read")));
    }
    Ok(maps)
}
