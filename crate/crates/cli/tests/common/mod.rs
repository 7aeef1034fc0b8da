#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Output;

use sha2::{Digest, Sha256};

pub fn multifuse(dir: &Path, args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_multifuse"))
        .current_dir(dir)
        .env("MULTIFUSE_THREADS", "2")
        .args(args)
        .output()
        .expect("spawn multifuse")
}

pub fn ok(dir: &Path, args: &[&str]) -> String {
    let out = multifuse(dir, args);
    assert!(
        out.status.success(),
        "multifuse {args:?} failed:\n{}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Three topical groups of ten articles. Articles cite mostly within their
/// group and use mostly their group's words.
pub fn write_corpus(dir: &Path) {
    let mut edges = String::from("article_id,reference_id\n");
    let mut counts = String::from("article_id,term,count\n");
    for a in 0..30 {
        let g = a / 10;
        for r in 0..6 {
            let group = if (a + r) % 5 == 0 { (g + 1) % 3 } else { g };
            edges += &format!("p{a},ref{group}_{}\n", (a * 7 + r * 3) % 12);
        }
        for w in 0..8 {
            let group = if (a + w) % 6 == 0 { (g + 2) % 3 } else { g };
            counts += &format!("p{a},w{group}_{},{}\n", (a * 5 + w * 2) % 10, 1 + (a + w) % 4);
        }
        counts += &format!("p{a},common,2\n");
    }
    std::fs::write(dir.join("edges.csv"), edges).unwrap();
    std::fs::write(dir.join("counts.csv"), counts).unwrap();
}

pub const CONFIG: &str = r#"
schema_version = 1
output_dir = "out"

[[layers]]
name = "cr"
recipe = "citation"
path = "edges.csv"

[[layers]]
name = "bow"
recipe = "words"
path = "counts.csv"
min_docs = 2

[[layers]]
name = "topics"
recipe = "topics"
path = "counts.csv"
min_docs = 2
k = [2, 3]

[lda]
sweeps = 60
burn_in = 20
seed = 5

[snf]
k_neighbors = 6
iterations = 10

[cluster]
seeds = [0, 1, 2]

[export]
matrix = "cr+bow_snf"
threshold = 0.01
crosstabs = [["cr", "cr+bow_snf"]]
"#;

pub fn setup() -> tempfile::TempDir {
    let d = tempfile::TempDir::new().unwrap();
    write_corpus(d.path());
    std::fs::write(d.path().join("run.toml"), CONFIG).unwrap();
    d
}

/// SHA-256 of every file under `root`, keyed by relative path.
pub fn hash_tree(root: &Path) -> BTreeMap<PathBuf, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let digest = Sha256::digest(std::fs::read(&p).unwrap());
                let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), hex);
            }
        }
    }
    out
}
