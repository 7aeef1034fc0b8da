//! Shared data types: similarity layers, incidences, distributions, partitions
//! and multiplex bundles, plus the elementary matrix hygiene used everywhere.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Absolute tolerance under which `m_ij` and `m_ji` count as equal.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Tolerance on row sums of a [`DistributionMatrix`].
pub const ROW_SUM_TOL: f64 = 1e-9;

fn check_unique(ids: &[String]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

/// Fails with [`Error::Alignment`] unless both id lists are equal, in order.
pub fn ensure_aligned(left: &[String], right: &[String]) -> Result<()> {
    if left.len() != right.len() {
        return Err(Error::Alignment(format!("{} vs {} nodes", left.len(), right.len())));
    }
    if let Some(pos) = left.iter().zip(right).position(|(a, b)| a != b) {
        return Err(Error::Alignment(format!(
            "position {pos}: `{}` vs `{}`",
            left[pos], right[pos]
        )));
    }
    Ok(())
}

/// Square, symmetric, nonnegative matrix of pairwise similarities with
/// one opaque identifier per node.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    values: Matrix,
    node_ids: Vec<String>,
}

impl SimilarityMatrix {
    /// Validates `values` against the similarity invariants. Pairs that differ
    /// by less than [`SYMMETRY_TOL`] are averaged to exact symmetry.
    pub fn new(values: Matrix, node_ids: Vec<String>) -> Result<Self> {
        validate_similarity(Self { values, node_ids })
    }

    /// Convenience constructor with ids `"0"`, `"1"`, ...
    pub fn with_index_ids(values: Matrix) -> Result<Self> {
        let ids = (0..values.rows()).map(|i| format!("{i}")).collect();
        Self::new(values, ids)
    }

    pub(crate) fn from_parts_unchecked(values: Matrix, node_ids: Vec<String>) -> Self {
        debug_assert_eq!(values.rows(), node_ids.len());
        Self { values, node_ids }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.values.rows()
    }

    #[inline]
    pub fn values(&self) -> &Matrix {
        &self.values
    }

    #[inline]
    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn into_parts(self) -> (Matrix, Vec<String>) {
        (self.values, self.node_ids)
    }

    /// Sum of every entry, diagonal included.
    pub fn total(&self) -> f64 {
        self.values.sum()
    }

    /// Fraction of strictly positive off-diagonal entries.
    pub fn density(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            return 0.0;
        }
        let mut positive = 0usize;
        for i in 0..n {
            for j in 0..n {
                if i != j && self.values[(i, j)] > 0.0 {
                    positive += 1;
                }
            }
        }
        positive as f64 / (n * (n - 1)) as f64
    }

    /// Relabels nodes: node `i` of the output is node `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let ids = perm.iter().map(|&p| self.node_ids[p].clone()).collect();
        Self { values: self.values.permuted(perm), node_ids: ids }
    }
}

/// Checks every [`SimilarityMatrix`] invariant and returns the matrix with
/// near-symmetric pairs averaged.
pub fn validate_similarity(m: SimilarityMatrix) -> Result<SimilarityMatrix> {
    let SimilarityMatrix { mut values, node_ids } = m;
    if !values.is_square() {
        return Err(Error::NotSquare { rows: values.rows(), cols: values.cols() });
    }
    if values.rows() != node_ids.len() {
        return Err(Error::IdCountMismatch { values: values.rows(), ids: node_ids.len() });
    }
    let n = values.rows();
    for i in 0..n {
        for j in 0..n {
            let v = values[(i, j)];
            if !v.is_finite() {
                return Err(Error::NonFinite { i, j });
            }
            if v < 0.0 {
                return Err(Error::NegativeEntry { i, j, value: v });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (values[(i, j)], values[(j, i)]);
            let diff = libm::fabs(a - b);
            if diff > SYMMETRY_TOL {
                return Err(Error::Asymmetry { i, j, diff });
            }
            if a != b {
                let mean = 0.5 * (a + b);
                values[(i, j)] = mean;
                values[(j, i)] = mean;
            }
        }
    }
    check_unique(&node_ids)?;
    Ok(SimilarityMatrix { values, node_ids })
}

/// Replaces `m` by `(m + mᵀ) / 2` in place. Panics if `m` is not square.
pub(crate) fn symmetrize_in_place(m: &mut Matrix) {
    assert!(m.is_square());
    let n = m.rows();
    for i in 0..n {
        for j in (i + 1)..n {
            let mean = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = mean;
            m[(j, i)] = mean;
        }
    }
}

/// Arithmetic mean of a square matrix and its transpose.
pub fn symmetrize(values: &Matrix, node_ids: Vec<String>) -> Result<SimilarityMatrix> {
    if !values.is_square() {
        return Err(Error::NotSquare { rows: values.rows(), cols: values.cols() });
    }
    if let Some(pos) = values.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { i: pos / values.cols(), j: pos % values.cols() });
    }
    let mut out = values.clone();
    symmetrize_in_place(&mut out);
    SimilarityMatrix::new(out, node_ids)
}

/// Copy of `m` with the diagonal set to zero.
pub fn zero_diagonal(m: &SimilarityMatrix) -> SimilarityMatrix {
    let mut values = m.values.clone();
    for i in 0..values.rows() {
        values[(i, i)] = 0.0;
    }
    SimilarityMatrix { values, node_ids: m.node_ids.clone() }
}

/// Binary articles × features incidence. Each row holds the sorted indices
/// of the features the article is linked to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteIncidence {
    articles: Vec<String>,
    features: Vec<String>,
    rows: Vec<Vec<usize>>,
}

impl BipartiteIncidence {
    /// Rows are deduplicated and sorted. Rejects articles without features.
    pub fn new(articles: Vec<String>, features: Vec<String>, rows: Vec<Vec<usize>>) -> Result<Self> {
        if articles.len() != rows.len() {
            return Err(Error::IdCountMismatch { values: rows.len(), ids: articles.len() });
        }
        check_unique(&articles)?;
        check_unique(&features)?;
        let mut empty = Vec::new();
        let mut clean = Vec::with_capacity(rows.len());
        for (id, mut row) in articles.iter().zip(rows) {
            row.sort_unstable();
            row.dedup();
            if let Some(&bad) = row.iter().find(|&&c| c >= features.len()) {
                return Err(Error::DimensionMismatch { left: bad, right: features.len() });
            }
            if row.is_empty() {
                empty.push(id.clone());
            }
            clean.push(row);
        }
        if !empty.is_empty() {
            return Err(Error::EmptyArticle(empty));
        }
        Ok(Self { articles, features, rows: clean })
    }

    /// Builds an incidence from `(article, feature)` pairs. Article and
    /// feature order follow first appearance.
    pub fn from_pairs<A: AsRef<str>, F: AsRef<str>>(pairs: &[(A, F)]) -> Result<Self> {
        let mut articles: Vec<String> = Vec::new();
        let mut features: Vec<String> = Vec::new();
        let mut a_index: BTreeMap<String, usize> = BTreeMap::new();
        let mut f_index: BTreeMap<String, usize> = BTreeMap::new();
        let mut rows: Vec<Vec<usize>> = Vec::new();
        for (a, f) in pairs {
            let ai = *a_index.entry(a.as_ref().into()).or_insert_with(|| {
                articles.push(a.as_ref().into());
                rows.push(Vec::new());
                articles.len() - 1
            });
            let fi = *f_index.entry(f.as_ref().into()).or_insert_with(|| {
                features.push(f.as_ref().into());
                features.len() - 1
            });
            rows[ai].push(fi);
        }
        Self::new(articles, features, rows)
    }

    pub fn n_articles(&self) -> usize {
        self.articles.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn articles(&self) -> &[String] {
        &self.articles
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    /// Sorted feature indices of article `i`.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn contains(&self, article: usize, feature: usize) -> bool {
        self.rows[article].binary_search(&feature).is_ok()
    }

    /// Keeps only `ids`, in that order. Fails if an id is unknown.
    pub fn select(&self, ids: &[String]) -> Result<Self> {
        let index: BTreeMap<&str, usize> =
            self.articles.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
        let mut rows = Vec::with_capacity(ids.len());
        for id in ids {
            let i = index
                .get(id.as_str())
                .ok_or_else(|| Error::Alignment(format!("unknown article `{id}`")))?;
            rows.push(self.rows[*i].clone());
        }
        Self::new(ids.to_vec(), self.features.clone(), rows)
    }
}

/// Row-stochastic articles × features matrix stored as sparse rows of
/// `(feature, weight)` pairs sorted by feature, zeros omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionMatrix {
    row_ids: Vec<String>,
    col_ids: Vec<String>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl DistributionMatrix {
    pub fn new(row_ids: Vec<String>, col_ids: Vec<String>, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if row_ids.len() != rows.len() {
            return Err(Error::IdCountMismatch { values: rows.len(), ids: row_ids.len() });
        }
        check_unique(&row_ids)?;
        check_unique(&col_ids)?;
        let mut clean = Vec::with_capacity(rows.len());
        for (i, mut row) in rows.into_iter().enumerate() {
            row.retain(|&(_, w)| w != 0.0);
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut sum = 0.0;
            for (k, &(c, w)) in row.iter().enumerate() {
                if c >= col_ids.len() {
                    return Err(Error::DimensionMismatch { left: c, right: col_ids.len() });
                }
                if k > 0 && row[k - 1].0 == c {
                    return Err(Error::Config(format!("row `{}` repeats column {c}", row_ids[i])));
                }
                if !w.is_finite() {
                    return Err(Error::NonFinite { i, j: c });
                }
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::Domain { i, j: c, value: w });
                }
                sum += w;
            }
            if libm::fabs(sum - 1.0) > ROW_SUM_TOL {
                return Err(Error::Config(format!(
                    "row `{}` sums to {sum}, expected 1",
                    row_ids[i]
                )));
            }
            clean.push(row);
        }
        Ok(Self { row_ids, col_ids, rows: clean })
    }

    /// Builds from dense rows; zero cells are dropped.
    pub fn from_dense(row_ids: Vec<String>, col_ids: Vec<String>, dense: &Matrix) -> Result<Self> {
        let rows = (0..dense.rows())
            .map(|i| dense.row(i).iter().copied().enumerate().filter(|&(_, w)| w != 0.0).collect())
            .collect();
        Self::new(row_ids, col_ids, rows)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_ids.len()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[String] {
        &self.col_ids
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n_rows(), self.n_cols());
        for (i, row) in self.rows.iter().enumerate() {
            for &(c, w) in row {
                m[(i, c)] = w;
            }
        }
        m
    }

    /// Permutes the feature columns: column `c` moves to `perm[c]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_cols() {
            return Err(Error::DimensionMismatch { left: perm.len(), right: self.n_cols() });
        }
        let mut cols = self.col_ids.clone();
        for (c, id) in self.col_ids.iter().enumerate() {
            cols[perm[c]] = id.clone();
        }
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&(c, w)| (perm[c], w)).collect())
            .collect();
        Self::new(self.row_ids.clone(), cols, rows)
    }
}

/// Cluster label per node, canonicalized so labels are `0..c` in order of
/// first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    node_ids: Vec<String>,
}

impl Partition {
    pub fn new(labels: Vec<usize>, node_ids: Vec<String>) -> Result<Self> {
        if labels.len() != node_ids.len() {
            return Err(Error::IdCountMismatch { values: labels.len(), ids: node_ids.len() });
        }
        check_unique(&node_ids)?;
        Ok(Self { labels: canonical_labels(&labels), node_ids })
    }

    pub fn with_index_ids(labels: Vec<usize>) -> Self {
        let ids = (0..labels.len()).map(|i| format!("{i}")).collect();
        Self { labels: canonical_labels(&labels), node_ids: ids }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_clusters(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m + 1)
    }

    /// Sizes of each cluster, indexed by label.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0usize; self.num_clusters()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Relabels so that clusters are numbered `0..c` by first appearance.
pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Ordered similarity layers over one shared node index.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplexBundle {
    layers: Vec<SimilarityMatrix>,
}

impl MultiplexBundle {
    pub fn new(layers: Vec<SimilarityMatrix>) -> Result<Self> {
        if let Some((first, rest)) = layers.split_first() {
            for layer in rest {
                ensure_aligned(first.node_ids(), layer.node_ids())?;
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[SimilarityMatrix] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn n(&self) -> usize {
        self.layers.first().map_or(0, SimilarityMatrix::n)
    }

    pub fn node_ids(&self) -> &[String] {
        self.layers.first().map_or(&[], |l| l.node_ids())
    }

    pub fn into_layers(self) -> Vec<SimilarityMatrix> {
        self.layers
    }
}
