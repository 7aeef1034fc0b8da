//! Readers for citation edges, word counts and externally computed
//! distributions.
//!
//! All three formats are delimiter-separated, one record per line. Blank
//! lines and lines starting with `#` are skipped, as is a leading header
//! whose first field is `article_id`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use multifuse_core::counts::CountTable;
use multifuse_core::{BipartiteIncidence, DistributionMatrix};

/// Deviation of a raw row sum from 1 above which renormalization is logged.
pub const RENORMALIZE_LOG_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{}: {source}", file.display())]
    Io { file: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {reason}: `{text}`", file.display())]
    Parse { file: PathBuf, line: u64, text: String, reason: String },
    #[error("{}:{line}: negative count: `{text}`", file.display())]
    NegativeCount { file: PathBuf, line: u64, text: String },
    #[error("{}: {source}", file.display())]
    Model { file: PathBuf, source: multifuse_core::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadOptions {
    pub delimiter: u8,
    /// Drop articles without any entry instead of failing.
    pub drop_empty: bool,
}

impl Default for ReadOptions {
    fn default() -> Self {
        Self { delimiter: b',', drop_empty: false }
    }
}

impl ReadOptions {
    pub fn tsv(mut self, tsv: bool) -> Self {
        self.delimiter = if tsv { b'\t' } else { b',' };
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Citations {
    pub incidence: BipartiteIncidence,
    /// Articles removed because they had no references.
    pub dropped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distributions {
    pub matrix: DistributionMatrix,
    /// Rows whose raw sum differed from 1, with that sum.
    pub renormalized: Vec<(String, f64)>,
}

struct Record<'a> {
    line: u64,
    text: &'a str,
    fields: Vec<String>,
}

struct Source {
    path: PathBuf,
    text: String,
}

impl Source {
    fn open(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io { file: path.into(), source })?;
        Ok(Self { path: path.into(), text })
    }

    fn parse_error(&self, line: u64, reason: impl Into<String>) -> IngestError {
        IngestError::Parse {
            file: self.path.clone(),
            line,
            text: self.line_text(line).to_string(),
            reason: reason.into(),
        }
    }

    fn line_text(&self, line: u64) -> &str {
        self.text.lines().nth(line.saturating_sub(1) as usize).unwrap_or("")
    }

    fn records(&self, opts: &ReadOptions) -> Result<Vec<Record<'_>>, IngestError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .delimiter(opts.delimiter)
            .from_reader(self.text.as_bytes());
        let lines: Vec<&str> = self.text.lines().collect();
        let mut out = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                self.parse_error(line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            let fields: Vec<String> = rec.iter().map(str::to_string).collect();
            if fields.iter().all(String::is_empty) {
                continue;
            }
            if out.is_empty() && fields[0].eq_ignore_ascii_case("article_id") {
                continue;
            }
            if fields[0].is_empty() {
                return Err(self.parse_error(line, "missing article id"));
            }
            let text = lines.get(line.saturating_sub(1) as usize).copied().unwrap_or("");
            out.push(Record { line, text, fields });
        }
        Ok(out)
    }

    fn model_error(&self, source: multifuse_core::Error) -> IngestError {
        IngestError::Model { file: self.path.clone(), source }
    }
}

/// Interns ids in first-appearance order.
#[derive(Default)]
struct Index {
    ids: Vec<String>,
    map: BTreeMap<String, usize>,
}

impl Index {
    fn get(&mut self, id: &str) -> usize {
        if let Some(&i) = self.map.get(id) {
            return i;
        }
        self.ids.push(id.to_string());
        self.map.insert(id.to_string(), self.ids.len() - 1);
        self.ids.len() - 1
    }
}

/// Reads `article_id,reference_id` pairs. A line with an empty or missing
/// reference declares an article without contributing a reference.
pub fn read_citation_edges(path: &Path, opts: &ReadOptions) -> Result<Citations, IngestError> {
    let src = Source::open(path)?;
    let mut articles = Index::default();
    let mut refs = Index::default();
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for r in src.records(opts)? {
        if r.fields.len() > 2 {
            return Err(src.parse_error(r.line, format!("expected 2 fields, found {}", r.fields.len())));
        }
        let a = articles.get(&r.fields[0]);
        if a == rows.len() {
            rows.push(Vec::new());
        }
        if let Some(reference) = r.fields.get(1).filter(|s| !s.is_empty()) {
            rows[a].push(refs.get(reference));
        }
    }
    let mut ids = articles.ids;
    let mut dropped = Vec::new();
    if opts.drop_empty {
        let keep: Vec<bool> = rows.iter().map(|r| !r.is_empty()).collect();
        dropped = ids.iter().zip(&keep).filter(|(_, &k)| !k).map(|(id, _)| id.clone()).collect();
        let mut k = keep.iter();
        ids.retain(|_| *k.next().unwrap());
        rows.retain(|r| !r.is_empty());
    }
    let incidence = BipartiteIncidence::new(ids, refs.ids, rows).map_err(|e| src.model_error(e))?;
    Ok(Citations { incidence, dropped })
}

/// Reads `article_id,term,count` triples. Repeated triples are summed.
/// Articles whose counts are all zero are kept as empty rows.
pub fn read_count_table(path: &Path, opts: &ReadOptions) -> Result<CountTable, IngestError> {
    let src = Source::open(path)?;
    let mut articles = Index::default();
    let mut terms = Index::default();
    let mut rows: Vec<Vec<(usize, u64)>> = Vec::new();
    for r in src.records(opts)? {
        if r.fields.len() != 3 {
            return Err(src.parse_error(r.line, format!("expected 3 fields, found {}", r.fields.len())));
        }
        if r.fields[1].is_empty() {
            return Err(src.parse_error(r.line, "missing term"));
        }
        let count = match r.fields[2].parse::<i64>() {
            Ok(c) if c < 0 => {
                return Err(IngestError::NegativeCount { file: src.path.clone(), line: r.line, text: r.text.to_string() })
            }
            Ok(c) => c as u64,
            Err(_) => return Err(src.parse_error(r.line, "count is not an integer")),
        };
        let a = articles.get(&r.fields[0]);
        if a == rows.len() {
            rows.push(Vec::new());
        }
        let t = terms.get(&r.fields[1]);
        rows[a].push((t, count));
    }
    CountTable::new(articles.ids, terms.ids, rows).map_err(|e| src.model_error(e))
}

/// Reads `article_id,feature,weight` triples and rescales each row to sum
/// to 1. Repeated triples are summed.
pub fn read_distribution_table(path: &Path, opts: &ReadOptions) -> Result<Distributions, IngestError> {
    let src = Source::open(path)?;
    let mut articles = Index::default();
    let mut features = Index::default();
    let mut rows: Vec<BTreeMap<usize, f64>> = Vec::new();
    for r in src.records(opts)? {
        if r.fields.len() != 3 {
            return Err(src.parse_error(r.line, format!("expected 3 fields, found {}", r.fields.len())));
        }
        if r.fields[1].is_empty() {
            return Err(src.parse_error(r.line, "missing feature"));
        }
        let w = match r.fields[2].parse::<f64>() {
            Ok(w) if w.is_finite() && w >= 0.0 => w,
            Ok(_) => return Err(src.parse_error(r.line, "weight must be finite and nonnegative")),
            Err(_) => return Err(src.parse_error(r.line, "weight is not a number")),
        };
        let a = articles.get(&r.fields[0]);
        if a == rows.len() {
            rows.push(BTreeMap::new());
        }
        let f = features.get(&r.fields[1]);
        *rows[a].entry(f).or_default() += w;
    }
    let mut renormalized = Vec::new();
    let mut out = Vec::with_capacity(rows.len());
    for (id, row) in articles.ids.iter().zip(rows) {
        let sum: f64 = row.values().sum();
        if sum <= 0.0 {
            return Err(src.model_error(multifuse_core::Error::ZeroRow(id.clone())));
        }
        if (sum - 1.0).abs() > RENORMALIZE_LOG_TOL {
            log::info!("{}: row `{id}` sums to {sum}, renormalized", src.path.display());
            renormalized.push((id.clone(), sum));
        }
        out.push(row.into_iter().map(|(f, w)| (f, w / sum)).collect());
    }
    let matrix = DistributionMatrix::new(articles.ids, features.ids, out).map_err(|e| src.model_error(e))?;
    Ok(Distributions { matrix, renormalized })
}
