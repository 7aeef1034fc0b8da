//! On-disk formats: dense matrices as headerless CSV with an `.ids`
//! sidecar, partitions as `node_id,cluster_id`, distributions as
//! `article_id,feature,weight`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use multifuse_core::{DistributionMatrix, Matrix, Partition, SimilarityMatrix};

pub fn ids_path(matrix_path: &Path) -> PathBuf {
    matrix_path.with_extension("ids")
}

/// Writes `values` row by row. Floats use the shortest representation that
/// parses back to the same value.
pub fn write_matrix(path: &Path, m: &SimilarityMatrix) -> Result<()> {
    let v = m.values();
    let mut out = String::with_capacity(v.rows() * v.cols() * 8);
    for i in 0..v.rows() {
        for (j, x) in v.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{x}").unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    let mut ids = m.node_ids().join("\n");
    ids.push('\n');
    let sidecar = ids_path(path);
    fs::write(&sidecar, ids).with_context(|| format!("writing {}", sidecar.display()))
}

pub fn read_matrix(path: &Path) -> Result<SimilarityMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let sidecar = ids_path(path);
    let ids: Vec<String> = fs::read_to_string(&sidecar)
        .with_context(|| format!("reading {}", sidecar.display()))?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    let mut values = Vec::with_capacity(ids.len() * ids.len());
    let mut rows = 0;
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let before = values.len();
        for field in line.split(',') {
            let x: f64 = field
                .trim()
                .parse()
                .with_context(|| format!("{}:{}: bad number `{}`", path.display(), ln + 1, field.trim()))?;
            values.push(x);
        }
        if values.len() - before != ids.len() {
            bail!("{}:{}: expected {} columns, found {}", path.display(), ln + 1, ids.len(), values.len() - before);
        }
        rows += 1;
    }
    let m = Matrix::from_vec(rows, ids.len(), values);
    SimilarityMatrix::new(m, ids).with_context(|| format!("validating {}", path.display()))
}

pub fn write_partition(path: &Path, p: &Partition) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["node_id", "cluster_id"])?;
    for (id, c) in p.node_ids().iter().zip(p.labels()) {
        w.write_record([id.as_str(), &c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_partition(path: &Path) -> Result<Partition> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let (mut ids, mut labels) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.with_context(|| format!("reading {}", path.display()))?;
        if rec.len() != 2 {
            bail!("{}: expected node_id,cluster_id, found `{}`", path.display(), rec.iter().collect::<Vec<_>>().join(","));
        }
        ids.push(rec[0].to_string());
        labels.push(rec[1].trim().parse::<usize>().with_context(|| format!("{}: bad cluster id `{}`", path.display(), &rec[1]))?);
    }
    Partition::new(labels, ids).with_context(|| format!("validating {}", path.display()))
}

pub fn write_distribution(path: &Path, d: &DistributionMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["article_id", "feature", "weight"])?;
    for i in 0..d.n_rows() {
        for &(c, x) in d.row(i) {
            w.write_record([d.row_ids()[i].as_str(), &d.col_ids()[c], &x.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
