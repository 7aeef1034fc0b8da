//! Raw article × term count tables and the document-frequency vocabulary filter.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Default minimum number of documents a term must occur in.
pub const DEFAULT_MIN_DOCS: usize = 3;
/// Default maximum fraction of documents a term may occur in.
pub const DEFAULT_MAX_DOC_FRACTION: f64 = 0.95;

/// Nonnegative integer counts, stored as sparse rows sorted by term index.
/// Rows may be empty; normalization downstream rejects them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    row_ids: Vec<String>,
    term_ids: Vec<String>,
    rows: Vec<Vec<(usize, u64)>>,
}

impl CountTable {
    /// Repeated `(row, term)` entries are summed and zero counts dropped.
    pub fn new(row_ids: Vec<String>, term_ids: Vec<String>, rows: Vec<Vec<(usize, u64)>>) -> Result<Self> {
        if row_ids.len() != rows.len() {
            return Err(Error::IdCountMismatch { values: rows.len(), ids: row_ids.len() });
        }
        let mut clean = Vec::with_capacity(rows.len());
        for row in rows {
            let mut acc: BTreeMap<usize, u64> = BTreeMap::new();
            for (t, c) in row {
                if t >= term_ids.len() {
                    return Err(Error::DimensionMismatch { left: t, right: term_ids.len() });
                }
                *acc.entry(t).or_default() += c;
            }
            clean.push(acc.into_iter().filter(|&(_, c)| c > 0).collect());
        }
        Ok(Self { row_ids, term_ids, rows: clean })
    }

    /// Builds a table from `(row, term, count)` triples; ids keep first-appearance order.
    pub fn from_triples<R: AsRef<str>, T: AsRef<str>>(triples: &[(R, T, u64)]) -> Result<Self> {
        let mut row_ids: Vec<String> = Vec::new();
        let mut term_ids: Vec<String> = Vec::new();
        let mut r_index: BTreeMap<String, usize> = BTreeMap::new();
        let mut t_index: BTreeMap<String, usize> = BTreeMap::new();
        let mut rows: Vec<Vec<(usize, u64)>> = Vec::new();
        for (r, t, c) in triples {
            let ri = *r_index.entry(r.as_ref().into()).or_insert_with(|| {
                row_ids.push(r.as_ref().into());
                rows.push(Vec::new());
                row_ids.len() - 1
            });
            let ti = *t_index.entry(t.as_ref().into()).or_insert_with(|| {
                term_ids.push(t.as_ref().into());
                term_ids.len() - 1
            });
            rows[ri].push((ti, *c));
        }
        Self::new(row_ids, term_ids, rows)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.term_ids.len()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn term_ids(&self) -> &[String] {
        &self.term_ids
    }

    pub fn row(&self, i: usize) -> &[(usize, u64)] {
        &self.rows[i]
    }

    pub fn count(&self, row: usize, term: usize) -> u64 {
        let r = &self.rows[row];
        r.binary_search_by_key(&term, |&(t, _)| t).map_or(0, |k| r[k].1)
    }

    pub fn row_total(&self, i: usize) -> u64 {
        self.rows[i].iter().map(|&(_, c)| c).sum()
    }

    pub fn total_tokens(&self) -> u64 {
        (0..self.n_rows()).map(|i| self.row_total(i)).sum()
    }

    /// Ids of rows without any positive count.
    pub fn empty_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .zip(&self.row_ids)
            .filter(|(r, _)| r.is_empty())
            .map(|(_, id)| id.clone())
            .collect()
    }

    /// Number of documents each term occurs in (count > 0).
    pub fn document_frequencies(&self) -> Vec<usize> {
        let mut df = vec![0usize; self.n_terms()];
        for row in &self.rows {
            for &(t, _) in row {
                df[t] += 1;
            }
        }
        df
    }

    /// Drops the rows with the given ids.
    pub fn without_rows(&self, drop: &[String]) -> Self {
        let (row_ids, rows) = self
            .row_ids
            .iter()
            .zip(&self.rows)
            .filter(|(id, _)| !drop.contains(id))
            .map(|(id, r)| (id.clone(), r.clone()))
            .unzip();
        Self { row_ids, term_ids: self.term_ids.clone(), rows }
    }

    /// Keeps only `ids`, in that order.
    pub fn select_rows(&self, ids: &[String]) -> Result<Self> {
        let index: BTreeMap<&str, usize> =
            self.row_ids.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
        let mut rows = Vec::with_capacity(ids.len());
        for id in ids {
            let i = index
                .get(id.as_str())
                .ok_or_else(|| Error::Alignment(format!("unknown article `{id}`")))?;
            rows.push(self.rows[*i].clone());
        }
        Ok(Self { row_ids: ids.to_vec(), term_ids: self.term_ids.clone(), rows })
    }
}

/// Result of [`filter_vocabulary`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredCounts {
    pub table: CountTable,
    pub removed_terms: Vec<String>,
    /// Rows left without any term after filtering.
    pub emptied_rows: Vec<String>,
}

/// Removes terms occurring in fewer than `min_docs` documents or in more than
/// `max_doc_fraction · n` documents. Surviving terms keep their relative order.
pub fn filter_vocabulary(t: &CountTable, min_docs: usize, max_doc_fraction: f64) -> Result<FilteredCounts> {
    if !(0.0..=1.0).contains(&max_doc_fraction) {
        return Err(Error::InvalidFilter(format!("max_doc_fraction {max_doc_fraction} not in [0, 1]")));
    }
    let n = t.n_rows() as f64;
    let df = t.document_frequencies();
    let mut remap = vec![usize::MAX; t.n_terms()];
    let mut kept = Vec::new();
    let mut removed_terms = Vec::new();
    for (term, &f) in df.iter().enumerate() {
        if f < min_docs || f as f64 > max_doc_fraction * n {
            removed_terms.push(t.term_ids[term].clone());
        } else {
            remap[term] = kept.len();
            kept.push(t.term_ids[term].clone());
        }
    }
    if kept.is_empty() {
        return Err(Error::AllTermsRemoved);
    }
    let rows: Vec<Vec<(usize, u64)>> = t
        .rows
        .iter()
        .map(|r| r.iter().filter(|&&(k, _)| remap[k] != usize::MAX).map(|&(k, c)| (remap[k], c)).collect())
        .collect();
    let table = CountTable { row_ids: t.row_ids.clone(), term_ids: kept, rows };
    let emptied_rows = t
        .rows
        .iter()
        .zip(&table.rows)
        .zip(&t.row_ids)
        .filter(|((before, after), _)| !before.is_empty() && after.is_empty())
        .map(|(_, id)| id.clone())
        .collect();
    Ok(FilteredCounts { table, removed_terms, emptied_rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs_with_term(n: usize, with: usize) -> CountTable {
        let mut triples = Vec::new();
        for d in 0..n {
            triples.push((format!("d{d}"), String::from("common"), 1));
            if d < with {
                triples.push((format!("d{d}"), String::from("probe"), 2));
            }
        }
        CountTable::from_triples(&triples).unwrap()
    }

    #[test]
    fn repeated_triples_sum() {
        let t = CountTable::from_triples(&[("a1", "w1", 2), ("a1", "w1", 3)]).unwrap();
        assert_eq!(t.count(0, 0), 5);
    }

    #[test]
    fn rare_term_removed() {
        let t = docs_with_term(10, 2);
        let f = filter_vocabulary(&t, 3, 1.0).unwrap();
        assert_eq!(f.removed_terms, vec![String::from("probe")]);
    }

    #[test]
    fn ubiquitous_term_removed() {
        let t = docs_with_term(10, 5);
        let f = filter_vocabulary(&t, 0, 0.95).unwrap();
        assert_eq!(f.removed_terms, vec![String::from("common")]);
        assert_eq!(f.emptied_rows.len(), 5);
    }

    #[test]
    fn identity_filter() {
        let t = docs_with_term(10, 4);
        let f = filter_vocabulary(&t, 0, 1.0).unwrap();
        assert_eq!(f.table, t);
        assert!(f.removed_terms.is_empty());
    }

    #[test]
    fn all_removed_is_an_error() {
        let t = docs_with_term(4, 1);
        assert_eq!(filter_vocabulary(&t, 10, 1.0), Err(Error::AllTermsRemoved));
        assert!(matches!(filter_vocabulary(&t, 0, 1.5), Err(Error::InvalidFilter(_))));
    }

    #[test]
    fn zero_count_row_is_empty() {
        let t = CountTable::from_triples(&[("a1", "w1", 0)]).unwrap();
        assert_eq!(t.empty_rows(), vec![String::from("a1")]);
    }
}
