//! Directory conventions: stems pair artifacts across stages.
//!
//! A corpus directory from `gen` holds `images/`, `labels/`, and `scenes/`;
//! later stages read one of those and write flat directories keyed by the
//! same stem, so `scene_0003.png` pairs with `scene_0003.uemf` and friends.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;

/// File name reserved for run manifests; never treated as corpus content.
pub const MANIFEST_NAME: &str = "manifest.json";

/// Files in `dir` whose extension is one of `exts`, sorted by file name.
/// The reserved [`MANIFEST_NAME`] is skipped so a stage's own manifest never
/// masquerades as corpus content for the next stage.
pub fn list_by_extension(dir: &Path, exts: &[&str]) -> anyhow::Result<Vec<PathBuf>> {
    let entries =
        std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.file_name().and_then(|n| n.to_str()) == Some(MANIFEST_NAME) {
            continue;
        }
        let matched = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| exts.iter().any(|x| e.eq_ignore_ascii_case(x)));
        if path.is_file() && matched {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn stem_of(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Maps stem -> path, rejecting duplicate stems (e.g. `x.png` and `x.json`).
pub fn by_stem(files: Vec<PathBuf>) -> anyhow::Result<BTreeMap<String, PathBuf>> {
    let mut map = BTreeMap::new();
    for path in files {
        let stem = stem_of(&path);
        if let Some(previous) = map.insert(stem.clone(), path.clone()) {
            anyhow::bail!(
                "stem {stem:?} is ambiguous: {} and {}",
                previous.display(),
                path.display()
            );
        }
    }
    Ok(map)
}

/// Extensions the label-map loader accepts.
pub const LABEL_EXTS: [&str; 2] = ["png", "json"];
