#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

/// Command handle for the compiled binary under test.
pub fn densflow() -> Command {
    Command::new(env!("CARGO_BIN_EXE_densflow"))
}

/// Runs the binary with `args` and returns its output.
pub fn run(args: &[&str]) -> Output {
    densflow().args(args).output().expect("binary spawns")
}

/// Runs the binary and asserts exit code 0, returning stdout.
pub fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "expected success for {args:?}, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("stdout is utf-8")
}

/// Runs the binary and asserts the given nonzero exit code.
pub fn run_expect(args: &[&str], code: i32) -> String {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(code),
        "expected exit {code} for {args:?}\nstderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Relative path -> content digest for every file under `dir`.
pub fn tree_hashes(dir: &Path) -> BTreeMap<String, String> {
    let mut hashes = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(current) = stack.pop() {
        for entry in std::fs::read_dir(&current).expect("readable dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let body = std::fs::read(&path).expect("readable file");
                let rel = path.strip_prefix(dir).expect("under root").to_string_lossy().into_owned();
                hashes.insert(rel, hex::encode(Sha256::digest(&body)));
            }
        }
    }
    hashes
}

/// Parses a JSON file.
pub fn json_file(path: &Path) -> serde_json::Value {
    let body = std::fs::read_to_string(path).expect("readable json");
    serde_json::from_str(&body).expect("valid json")
}

/// Parses JSON text.
pub fn json_text(text: &str) -> serde_json::Value {
    serde_json::from_str(text).expect("valid json")
}
