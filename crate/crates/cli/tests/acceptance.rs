//! Acceptance gate: every release criterion runs here at its stated
//! tolerance and prints one `[PASS]`/`[FAIL]` line.
//!
//! Criteria that concern the operator workflow drive the compiled binary;
//! numeric identities and format contracts call the library directly. The
//! exhaustive reference evaluator is reimplemented here from the score
//! definitions and shares no code with the library.

mod common;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use std::time::Instant;

use common::{json_file, json_text, run_ok, tree_hashes};
use densflow_core::labelio::load_label_map;
use densflow_core::rle::{decode_rle, encode_rle};
use densflow_core::synthgen::{
    ContrastPolarity, DensityClass, Layering, Morphology, SceneSpec, SizeLaw,
    SpatialDistribution, Texture,
};
use densflow_core::uemf::{load_uemf, save_uemf};
use densflow_core::{
    compute_flow_targets, evaluate_dataset, follow_flows, generate_scene, perturb_field,
    DecodeParams, FlowField, InstanceLabelMap,
};

fn criterion(n: u32, label: &str, check: impl FnOnce() -> Result<String, String>) {
    match check() {
        Ok(detail) => println!("[PASS] criterion {n} ({label}): {detail}"),
        Err(detail) => {
            println!("[FAIL] criterion {n} ({label}): {detail}");
            panic!("criterion {n} ({label}) failed: {detail}");
        }
    }
}

fn s(path: &Path) -> String {
    path.to_str().expect("utf-8 path").to_string()
}

/// Generates single-scene corpora and collects their label maps under one
/// directory with distinct stems.
fn collect_labels(dir: &Path, gen_flags: &[&str], seeds: &[u64]) {
    std::fs::create_dir_all(dir).unwrap();
    for (i, &seed) in seeds.iter().enumerate() {
        let tmp = tempfile::tempdir().unwrap();
        let mut args = vec!["gen", "--out"];
        let out = s(tmp.path());
        args.push(&out);
        args.extend_from_slice(gen_flags);
        let seed_text = seed.to_string();
        args.extend_from_slice(&["--seed", &seed_text]);
        run_ok(&args);
        std::fs::rename(
            tmp.path().join("labels/scene_0000.png"),
            dir.join(format!("scene_{i:04}.png")),
        )
        .unwrap();
    }
}

#[test]
fn acceptance_1_sparse_oracle_round_trip() {
    criterion(1, "sparse oracle round trip", || {
        let started = Instant::now();
        let tmp = tempfile::tempdir().unwrap();
        let labels = tmp.path().join("labels");
        collect_labels(
            &labels,
            &["--density", "sparse", "--height", "256", "--width", "256", "--size-law", "uniform:10,20"],
            &(0..20).collect::<Vec<u64>>(),
        );

        for i in 0..20 {
            let map = load_label_map(&labels.join(format!("scene_{i:04}.png"))).unwrap();
            if map.n_instances() >= 100 {
                return Err(format!("scene {i} has {} instances", map.n_instances()));
            }
            let min_area = map.instance_areas().values().copied().min().unwrap_or(0);
            if min_area < 25 {
                return Err(format!("scene {i} has an instance of {min_area} px"));
            }
        }

        let fields = tmp.path().join("fields");
        let pred = tmp.path().join("pred");
        run_ok(&["flows", "--labels", &s(&labels), "--out", &s(&fields)]);
        run_ok(&["decode", "--fields", &s(&fields), "--out", &s(&pred)]);
        let report =
            json_text(&run_ok(&["eval", "--gt", &s(&labels), "--pred", &s(&pred), "--iou", "0.5"]));
        let map_score = report["aggregate"]["mAP"].as_f64().unwrap();
        let pq_score = report["aggregate"]["mPQ"].as_f64().unwrap();
        let elapsed = started.elapsed().as_secs_f64();
        if map_score < 0.95 {
            return Err(format!("mean AP@0.5 {map_score:.4} < 0.95"));
        }
        if pq_score < 0.90 {
            return Err(format!("mean PQ@0.5 {pq_score:.4} < 0.90"));
        }
        if elapsed >= 60.0 {
            return Err(format!("pipeline took {elapsed:.1}s >= 60s"));
        }
        Ok(format!("20 scenes, mAP {map_score:.4}, mPQ {pq_score:.4}, {elapsed:.1}s"))
    });
}

#[test]
fn acceptance_2_dense_oracle_round_trip() {
    criterion(2, "dense oracle round trip", || {
        let tmp = tempfile::tempdir().unwrap();
        let corpus = tmp.path().join("corpus");
        let labels = corpus.join("labels");
        collect_labels(&labels, &["--density", "high"], &(0..10).collect::<Vec<u64>>());

        for i in 0..10 {
            let map = load_label_map(&labels.join(format!("scene_{i:04}.png"))).unwrap();
            let n = map.n_instances();
            if !(500..=2500).contains(&n) {
                return Err(format!("scene {i} has {n} instances, outside 500..=2500"));
            }
            if map.height() != 1024 || map.width() != 1024 {
                return Err(format!("scene {i} is not 1024x1024"));
            }
        }

        let fields = tmp.path().join("fields");
        let pred = tmp.path().join("pred");
        run_ok(&["flows", "--labels", &s(&labels), "--out", &s(&fields)]);

        let solo_fields = tmp.path().join("solo_fields");
        std::fs::create_dir_all(&solo_fields).unwrap();
        std::fs::copy(fields.join("scene_0000.uemf"), solo_fields.join("scene_0000.uemf"))
            .unwrap();
        let solo_pred = tmp.path().join("solo_pred");
        let decode_start = Instant::now();
        run_ok(&["--threads", "1", "decode", "--fields", &s(&solo_fields), "--out", &s(&solo_pred)]);
        let decode_s = decode_start.elapsed().as_secs_f64();
        if decode_s >= 30.0 {
            return Err(format!("single-scene decode took {decode_s:.1}s >= 30s"));
        }

        run_ok(&["decode", "--fields", &s(&fields), "--out", &s(&pred)]);
        let report = json_text(&run_ok(&["eval", "--gt", &s(&labels), "--pred", &s(&pred)]));
        let map_score = report["aggregate"]["mAP"].as_f64().unwrap();
        if report["aggregate"]["dense"]["n"] != 10 {
            return Err("not all scenes landed in the dense split".into());
        }
        if map_score < 0.90 {
            return Err(format!("mean AP@0.5 {map_score:.4} < 0.90"));
        }

        let bench = json_text(&run_ok(&["--threads", "1", "bench", "--corpus", &s(&corpus)]));
        let peak = bench["peak_rss_bytes"].as_u64().unwrap();
        let limit = 2u64 * 1024 * 1024 * 1024;
        if peak >= limit {
            return Err(format!("peak RSS {peak} bytes >= 2 GiB"));
        }
        Ok(format!(
            "10 scenes, mAP {map_score:.4}, decode {decode_s:.2}s, peak RSS {} MiB",
            peak / (1024 * 1024)
        ))
    });
}

/// Splitmix-style counter hash, local to this gate.
fn hash(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn rand_in(seed: u64, salt: u64, lo: usize, hi: usize) -> usize {
    lo + (hash(seed.wrapping_mul(1315423911) ^ salt) % (hi - lo + 1) as u64) as usize
}

/// Random map of up to `max_n` overlapping rectangles, relabeled 1..=K.
fn random_map(seed: u64, salt: u64, h: usize, w: usize, max_n: usize) -> InstanceLabelMap {
    let mut map = InstanceLabelMap::new(h, w);
    let n = rand_in(seed, salt, 0, max_n);
    for k in 0..n {
        let s = salt.wrapping_add(1000).wrapping_add(k as u64 * 16);
        let r0 = rand_in(seed, s, 0, h - 2);
        let c0 = rand_in(seed, s + 1, 0, w - 2);
        let rh = rand_in(seed, s + 2, 2, 6);
        let rw = rand_in(seed, s + 3, 2, 6);
        for r in r0..(r0 + rh).min(h) {
            for c in c0..(c0 + rw).min(w) {
                map.set(r, c, k as u32 + 1);
            }
        }
    }
    map.relabel_sequential()
}

struct RefScores {
    tp: usize,
    fp: usize,
    fn_: usize,
    ap: f64,
    sq: f64,
    rq: f64,
    pq: f64,
}

/// Exhaustive evaluation: best (cardinality, total IoU) one-to-one matching
/// over pairs with IoU >= t, then the score formulas.
fn reference_scores(gt: &InstanceLabelMap, pred: &InstanceLabelMap, t: f64) -> RefScores {
    let mut gt_sets: BTreeMap<u32, HashSet<usize>> = BTreeMap::new();
    let mut pred_sets: BTreeMap<u32, HashSet<usize>> = BTreeMap::new();
    for (i, &l) in gt.labels().iter().enumerate() {
        if l != 0 {
            gt_sets.entry(l).or_default().insert(i);
        }
    }
    for (i, &l) in pred.labels().iter().enumerate() {
        if l != 0 {
            pred_sets.entry(l).or_default().insert(i);
        }
    }
    let gt_ids: Vec<u32> = gt_sets.keys().copied().collect();
    let pred_ids: Vec<u32> = pred_sets.keys().copied().collect();

    let mut iou: HashMap<(u32, u32), f64> = HashMap::new();
    for (&g, gs) in &gt_sets {
        for (&p, ps) in &pred_sets {
            let inter = gs.intersection(ps).count();
            if inter > 0 {
                let union = gs.len() + ps.len() - inter;
                iou.insert((g, p), inter as f64 / union as f64);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        gi: usize,
        gt_ids: &[u32],
        pred_ids: &[u32],
        iou: &HashMap<(u32, u32), f64>,
        t: f64,
        used: &mut Vec<bool>,
        count: usize,
        total: f64,
        best: &mut (usize, f64),
    ) {
        if gi == gt_ids.len() {
            if count > best.0 || (count == best.0 && total > best.1) {
                *best = (count, total);
            }
            return;
        }
        search(gi + 1, gt_ids, pred_ids, iou, t, used, count, total, best);
        for (pi, &p) in pred_ids.iter().enumerate() {
            if !used[pi] {
                if let Some(&v) = iou.get(&(gt_ids[gi], p)) {
                    if v >= t {
                        used[pi] = true;
                        search(gi + 1, gt_ids, pred_ids, iou, t, used, count + 1, total + v, best);
                        used[pi] = false;
                    }
                }
            }
        }
    }
    let mut best = (0usize, 0.0f64);
    search(0, &gt_ids, &pred_ids, &iou, t, &mut vec![false; pred_ids.len()], 0, 0.0, &mut best);
    let (tp, total) = best;
    let fp = pred_ids.len() - tp;
    let fn_ = gt_ids.len() - tp;

    let ap = if tp + fp + fn_ == 0 { 1.0 } else { tp as f64 / (tp + fp + fn_) as f64 };
    let sq = if tp == 0 { 1.0 } else { total / tp as f64 };
    let denom = tp as f64 + 0.5 * fp as f64 + 0.5 * fn_ as f64;
    let rq = if denom == 0.0 { 1.0 } else { tp as f64 / denom };
    RefScores { tp, fp, fn_, ap, sq, rq, pq: sq * rq }
}

#[test]
fn acceptance_3_metric_oracle_equivalence() {
    criterion(3, "metric oracle equivalence", || {
        let mut gts = BTreeMap::new();
        let mut preds = BTreeMap::new();
        for i in 0..200u64 {
            let id = format!("img_{i:03}");
            gts.insert(id.clone(), random_map(i, 1, 24, 24, 8));
            preds.insert(id, random_map(i, 2, 24, 24, 8));
        }
        for t in [0.5, 0.75] {
            let report = evaluate_dataset(&gts, &preds, t).map_err(|e| e.to_string())?;
            for image in &report.images {
                let r = reference_scores(&gts[&image.id], &preds[&image.id], t);
                if image.true_positives != r.tp
                    || image.false_positives != r.fp
                    || image.false_negatives != r.fn_
                {
                    return Err(format!("{} match counts diverge at T={t}", image.id));
                }
                for (name, got, want) in [
                    ("ap", image.ap, r.ap),
                    ("pq", image.pq, r.pq),
                    ("sq", image.sq, r.sq),
                    ("rq", image.rq, r.rq),
                ] {
                    if (got - want).abs() >= 1e-9 {
                        return Err(format!(
                            "{} {name} {got} vs reference {want} at T={t}",
                            image.id
                        ));
                    }
                }
            }
        }
        Ok("200 images, T in {0.5, 0.75}, all scores within 1e-9".into())
    });
}

/// A map of `n` single-pixel instances spread over one row.
fn n_instance_map(n: usize) -> InstanceLabelMap {
    let mut map = InstanceLabelMap::new(1, 2 * n + 1);
    for k in 0..n {
        map.set(0, 2 * k, k as u32 + 1);
    }
    map
}

#[test]
fn acceptance_4_protocol_identities() {
    criterion(4, "protocol identities", || {
        let tmp = tempfile::tempdir().unwrap();
        let labels = tmp.path().join("labels");
        collect_labels(
            &labels,
            &["--density", "sparse", "--height", "160", "--width", "160", "--size-law", "uniform:10,18"],
            &[101, 102],
        );
        let report = json_text(&run_ok(&["eval", "--gt", &s(&labels), "--pred", &s(&labels)]));
        if report["aggregate"]["mAP"].as_f64() != Some(1.0)
            || report["aggregate"]["mPQ"].as_f64() != Some(1.0)
        {
            return Err(format!("self-evaluation is not exactly 1.0: {}", report["aggregate"]));
        }

        let mut gts = BTreeMap::new();
        let mut preds = BTreeMap::new();
        for i in 0..60u64 {
            let id = format!("img_{i:02}");
            gts.insert(id.clone(), random_map(i, 4, 20, 20, 7));
            preds.insert(id, random_map(i, 5, 20, 20, 7));
        }
        let factored = evaluate_dataset(&gts, &preds, 0.5).map_err(|e| e.to_string())?;
        for image in &factored.images {
            if (image.pq - image.sq * image.rq).abs() >= 1e-12 {
                return Err(format!("{}: pq != sq*rq beyond 1e-12", image.id));
            }
        }

        let mut boundary = BTreeMap::new();
        for n in [99usize, 100, 101] {
            boundary.insert(format!("n{n}"), n_instance_map(n));
        }
        let split = evaluate_dataset(&boundary, &boundary, 0.5).map_err(|e| e.to_string())?;
        if split.sparse.n != 1 || split.dense.n != 2 {
            return Err(format!(
                "split boundary wrong: sparse {} dense {}",
                split.sparse.n, split.dense.n
            ));
        }
        Ok("self-eval exactly 1.0, PQ factors to 1e-12, split boundary at 100".into())
    });
}

#[test]
fn acceptance_5_target_field_invariants() {
    criterion(5, "target field invariants", || {
        let mut maps: Vec<InstanceLabelMap> = (0..45u64)
            .map(|i| random_map(i, 8, 48, 48, 12))
            .collect();
        for seed in 0..5u64 {
            let spec = SceneSpec {
                height: 96,
                width: 96,
                morphology: Morphology::IrregularBlob,
                density_class: DensityClass::Sparse,
                distribution: SpatialDistribution::Random,
                layering: Layering::Multilayer,
                size_law: SizeLaw::Uniform { a: 8.0, b: 16.0 },
                texture: Texture::Smooth,
                contrast_polarity: ContrastPolarity::BrightOnDark,
                seed,
            };
            let (_, map) = generate_scene(&spec).map_err(|e| e.to_string())?;
            maps.push(map);
        }

        let mut foreground = 0usize;
        let mut centers = 0usize;
        for (mi, map) in maps.iter().enumerate() {
            let field = compute_flow_targets(map);
            for (i, &label) in map.labels().iter().enumerate() {
                let fy = field.flow_y()[i];
                let fx = field.flow_x()[i];
                let prob = field.prob()[i];
                if label == 0 {
                    if fy != 0.0 || fx != 0.0 || prob != 0.0 {
                        return Err(format!("map {mi}: background pixel {i} is not all-zero"));
                    }
                } else {
                    if prob != 1.0 {
                        return Err(format!("map {mi}: foreground prob {prob} is not 1.0"));
                    }
                    let norm = (fy as f64).hypot(fx as f64);
                    foreground += 1;
                    if fy == 0.0 && fx == 0.0 {
                        centers += 1;
                    } else if (norm - 1.0).abs() >= 1e-5 {
                        return Err(format!("map {mi}: pixel {i} norm {norm} off unit"));
                    }
                }
            }
        }
        Ok(format!(
            "50 maps, {foreground} foreground px all unit-norm ({centers} exact-zero centers), background zero, prob binary"
        ))
    });
}

#[test]
fn acceptance_6_robustness_monotonicity() {
    criterion(6, "robustness monotonicity", || {
        let sigmas = [0.0, 0.05, 0.1, 0.2, 0.4];
        let mut means = [0.0f64; 5];
        for seed in 0..20u64 {
            let spec = SceneSpec {
                height: 192,
                width: 192,
                morphology: Morphology::Sphere,
                density_class: DensityClass::Medium,
                distribution: SpatialDistribution::Random,
                layering: Layering::Tiled,
                size_law: SizeLaw::Uniform { a: 6.0, b: 10.0 },
                texture: Texture::Smooth,
                contrast_polarity: ContrastPolarity::BrightOnDark,
                seed,
            };
            let (_, map) = generate_scene(&spec).map_err(|e| e.to_string())?;
            let field = compute_flow_targets(&map);
            for (k, &sigma) in sigmas.iter().enumerate() {
                let noisy = if sigma == 0.0 {
                    field.clone()
                } else {
                    perturb_field(&field, sigma, seed ^ 0x00C0_FFEE)
                };
                let pred =
                    follow_flows(&noisy, &DecodeParams::default()).map_err(|e| e.to_string())?;
                let gt = BTreeMap::from([("img".to_string(), map.clone())]);
                let pr = BTreeMap::from([("img".to_string(), pred)]);
                let report = evaluate_dataset(&gt, &pr, 0.5).map_err(|e| e.to_string())?;
                means[k] += report.images[0].ap / 20.0;
            }
        }
        for k in 1..sigmas.len() {
            if means[k] > means[k - 1] + 1e-12 {
                return Err(format!(
                    "mean AP rose from {:.4} at sigma {} to {:.4} at sigma {}",
                    means[k - 1],
                    sigmas[k - 1],
                    means[k],
                    sigmas[k]
                ));
            }
        }
        let shown: Vec<String> = means.iter().map(|m| format!("{m:.4}")).collect();
        Ok(format!("mean AP over sigmas {sigmas:?}: [{}]", shown.join(", ")))
    });
}

#[test]
fn acceptance_7_format_round_trips() {
    criterion(7, "format round trips", || {
        for i in 0..100u64 {
            let map = random_map(i, 11, 32, 32, 10);
            let runs = encode_rle(&map);
            let back = decode_rle(&runs, 32, 32).map_err(|e| e.to_string())?;
            if back != map {
                return Err(format!("RLE round trip {i} diverged"));
            }
        }

        let tmp = tempfile::tempdir().unwrap();
        for i in 0..100u64 {
            let (h, w) = (rand_in(i, 21, 1, 24), rand_in(i, 22, 1, 24));
            let n = h * w;
            let mut field = FlowField::new(h, w);
            for j in 0..n {
                let bits = hash(i.wrapping_mul(31).wrapping_add(j as u64));
                field.flow_y_mut()[j] = ((bits % 20001) as f32 / 10000.0) - 1.0;
                field.flow_x_mut()[j] = (((bits >> 20) % 20001) as f32 / 10000.0) - 1.0;
                field.prob_mut()[j] = ((bits >> 40) % 10001) as f32 / 10000.0;
            }
            let path = tmp.path().join(format!("f{i}.uemf"));
            save_uemf(&field, &path).map_err(|e| e.to_string())?;
            let back = load_uemf(&path).map_err(|e| e.to_string())?;
            let same = back.height() == h
                && back.width() == w
                && back.flow_y().iter().zip(field.flow_y()).all(|(a, b)| a.to_bits() == b.to_bits())
                && back.flow_x().iter().zip(field.flow_x()).all(|(a, b)| a.to_bits() == b.to_bits())
                && back.prob().iter().zip(field.prob()).all(|(a, b)| a.to_bits() == b.to_bits());
            if !same {
                return Err(format!("field file round trip {i} diverged"));
            }
        }

        let zero_path = tmp.path().join("zero.uemf");
        save_uemf(&FlowField::new(2, 2), &zero_path).map_err(|e| e.to_string())?;
        let len = std::fs::metadata(&zero_path).map_err(|e| e.to_string())?.len();
        if len != 68 {
            return Err(format!("2x2 zero field file is {len} bytes, expected 68"));
        }
        Ok("100 RLE and 100 field files bit-exact, 2x2 zero file is 68 bytes".into())
    });
}

fn full_pipeline(root: &Path, threads: &str) {
    let corpus = root.join("corpus");
    let fields = root.join("fields");
    let pred = root.join("pred");
    let report = root.join("report.json");
    run_ok(&[
        "--threads", threads, "gen", "--out", &s(&corpus), "--suite", "--n-per-class", "1",
        "--seed", "99",
    ]);
    run_ok(&[
        "--threads", threads, "flows", "--labels", &s(&corpus.join("labels")), "--out", &s(&fields),
    ]);
    run_ok(&["--threads", threads, "decode", "--fields", &s(&fields), "--out", &s(&pred)]);
    run_ok(&[
        "--threads", threads, "eval", "--gt", &s(&corpus.join("labels")), "--pred", &s(&pred),
        "--report", &s(&report),
    ]);
}

#[test]
fn acceptance_8_pipeline_determinism() {
    criterion(8, "pipeline determinism", || {
        let tmp = tempfile::tempdir().unwrap();
        let root = tmp.path().join("run");
        full_pipeline(&root, "1");
        let serial = tree_hashes(&root);
        std::fs::remove_dir_all(&root).map_err(|e| e.to_string())?;
        full_pipeline(&root, "4");
        let parallel = tree_hashes(&root);
        if serial != parallel {
            let diverging: Vec<&String> = serial
                .iter()
                .filter(|(k, v)| parallel.get(*k) != Some(v))
                .map(|(k, _)| k)
                .collect();
            return Err(format!("threads 1 vs 4 differ in {diverging:?}"));
        }
        full_pipeline(&root, "4");
        if tree_hashes(&root) != parallel {
            return Err("rerun with identical flags changed bytes".into());
        }
        let report = json_file(&root.join("report.json"));
        if report["images"].as_array().map(|a| a.len()) != Some(30) {
            return Err("suite pipeline did not score 30 images".into());
        }
        Ok(format!(
            "{} files byte-identical across thread counts and reruns",
            serial.len()
        ))
    });
}
