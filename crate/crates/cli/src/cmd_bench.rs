//! `bench`: time the targets, decode, and eval stages over a corpus.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use densflow_core::labelio::load_label_map;
use densflow_core::synthgen::DensityClass;
use densflow_core::{compute_flow_targets, evaluate_dataset, follow_flows, DecodeParams};

use crate::corpus::{list_by_extension, stem_of, LABEL_EXTS};
use crate::CmdResult;

#[derive(Debug, clap::Args)]
pub struct BenchArgs {
    /// Corpus directory; its labels/ subdirectory (or the directory itself)
    /// supplies the ground-truth label maps.
    #[arg(long)]
    corpus: PathBuf,
}

#[derive(Debug, Default, Serialize)]
struct StageTotals {
    n_scenes: usize,
    targets_ms: f64,
    decode_ms: f64,
    eval_ms: f64,
}

#[derive(Debug, Serialize)]
struct BenchReport {
    threads: usize,
    peak_rss_bytes: u64,
    sparse: StageTotals,
    medium: StageTotals,
    high: StageTotals,
}

pub fn run(args: BenchArgs) -> CmdResult {
    let labels_dir = {
        let nested = args.corpus.join("labels");
        if nested.is_dir() {
            nested
        } else {
            args.corpus.clone()
        }
    };
    let label_files = if labels_dir.is_dir() {
        list_by_extension(&labels_dir, &LABEL_EXTS)?
    } else {
        Vec::new()
    };

    let mut sparse = StageTotals::default();
    let mut medium = StageTotals::default();
    let mut high = StageTotals::default();
    let params = DecodeParams::default();
    for path in &label_files {
        let map = match load_label_map(path) {
            Ok(map) => map,
            Err(e) => {
                eprintln!("skipping {}: {e}", path.display());
                continue;
            }
        };

        let t0 = Instant::now();
        let field = compute_flow_targets(&map);
        let targets_ms = t0.elapsed().as_secs_f64() * 1e3;

        let t1 = Instant::now();
        let decoded = match follow_flows(&field, &params) {
            Ok(decoded) => decoded,
            Err(e) => {
                eprintln!("skipping {}: {e}", path.display());
                continue;
            }
        };
        let decode_ms = t1.elapsed().as_secs_f64() * 1e3;

        let stem = stem_of(path);
        let gt = BTreeMap::from([(stem.clone(), map)]);
        let pred = BTreeMap::from([(stem, decoded)]);
        let t2 = Instant::now();
        let evaluated = evaluate_dataset(&gt, &pred, 0.5);
        let eval_ms = t2.elapsed().as_secs_f64() * 1e3;
        if let Err(e) = evaluated {
            eprintln!("skipping {}: {e}", path.display());
            continue;
        }

        let n = gt.values().next().expect("inserted above").n_instances();
        let bucket = match DensityClass::of_count(n) {
            DensityClass::Sparse => &mut sparse,
            DensityClass::Medium => &mut medium,
            DensityClass::High => &mut high,
        };
        bucket.n_scenes += 1;
        bucket.targets_ms += targets_ms;
        bucket.decode_ms += decode_ms;
        bucket.eval_ms += eval_ms;
    }

    let report = BenchReport {
        threads: rayon::current_num_threads(),
        peak_rss_bytes: peak_rss_bytes(),
        sparse,
        medium,
        high,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

/// Peak resident set size of this process in bytes, 0 when unavailable.
fn peak_rss_bytes() -> u64 {
    let Ok(status) = std::fs::read_to_string("/proc/self/status") else {
        return 0;
    };
    for line in status.lines() {
        if let Some(rest) = line.strip_prefix("VmHWM:") {
            let kb: u64 = rest
                .trim()
                .trim_end_matches("kB")
                .trim()
                .parse()
                .unwrap_or(0);
            return kb * 1024;
        }
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_rss_is_positive_on_linux() {
        assert!(peak_rss_bytes() > 0);
    }
}
