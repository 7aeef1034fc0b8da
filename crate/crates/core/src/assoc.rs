//! Association statistics between similarity matrices and between partitions.
//!
//! Similarity matrices are compared through distance correlation of their row
//! embeddings: node `i` is the point given by row `i`, so two `n × n`
//! matrices become two samples of size `n` that can be tested for dependence.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{fill_rows, Matrix};
use crate::model::{ensure_aligned, Partition, SimilarityMatrix};

/// Pairwise Euclidean distances between node embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedDistances {
    d: Matrix,
}

impl EmbeddedDistances {
    /// Wraps a precomputed distance matrix; it must be square, symmetric,
    /// nonnegative and have a zero diagonal.
    pub fn from_matrix(d: Matrix) -> Result<Self> {
        if !d.is_square() {
            return Err(Error::NotSquare { rows: d.rows(), cols: d.cols() });
        }
        let n = d.rows();
        for i in 0..n {
            if d[(i, i)] != 0.0 {
                return Err(Error::Config(alloc::format!("distance diagonal at {i} is not zero")));
            }
            for j in 0..n {
                let v = d[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFinite { i, j });
                }
                if v < 0.0 {
                    return Err(Error::NegativeEntry { i, j, value: v });
                }
                if v != d[(j, i)] {
                    return Err(Error::Asymmetry { i, j, diff: libm::fabs(v - d[(j, i)]) });
                }
            }
        }
        Ok(Self { d })
    }

    pub fn n(&self) -> usize {
        self.d.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.d
    }
}

/// Distances between the rows of `s` viewed as points in `ℝⁿ`.
pub fn embed_rows(s: &SimilarityMatrix) -> EmbeddedDistances {
    let n = s.n();
    let v = s.values();
    let mut d = Matrix::zeros(n, n);
    fill_rows(&mut d, |i, out| {
        let ri = v.row(i);
        for (j, o) in out.iter_mut().enumerate() {
            if j != i {
                let sq: f64 = ri.iter().zip(v.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                *o = libm::sqrt(sq);
            }
        }
    });
    EmbeddedDistances { d }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceCorrelation {
    pub dcor: f64,
    pub dcor_sq: f64,
}

fn double_centered(d: &Matrix) -> Matrix {
    let n = d.rows();
    let nf = n as f64;
    let means: Vec<f64> = (0..n).map(|i| d.row(i).iter().sum::<f64>() / nf).collect();
    let grand = means.iter().sum::<f64>() / nf;
    // rows and columns share means because d is symmetric
    Matrix::from_fn(n, n, |i, j| d[(i, j)] - means[i] - means[j] + grand)
}

fn frobenius_inner(a: &Matrix, b: &Matrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum()
}

/// Sample distance correlation (V-statistic form) of two embeddings.
pub fn distance_correlation(a: &EmbeddedDistances, b: &EmbeddedDistances) -> Result<DistanceCorrelation> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { left: a.n(), right: b.n() });
    }
    if a.n() < 2 {
        return Err(Error::InsufficientSample { needed: 2, got: a.n() });
    }
    let n2 = (a.n() * a.n()) as f64;
    let ca = double_centered(&a.d);
    let cb = double_centered(&b.d);
    let dcov = frobenius_inner(&ca, &cb) / n2;
    let var_a = frobenius_inner(&ca, &ca) / n2;
    let var_b = frobenius_inner(&cb, &cb) / n2;
    if var_a <= 0.0 || var_b <= 0.0 {
        return Ok(DistanceCorrelation { dcor: 0.0, dcor_sq: 0.0 });
    }
    let dcor_sq = (dcov.max(0.0) / libm::sqrt(var_a * var_b)).min(1.0);
    Ok(DistanceCorrelation { dcor: libm::sqrt(dcor_sq), dcor_sq })
}

/// Distance correlation between two similarity matrices via row embedding.
pub fn matrix_distance_correlation(s1: &SimilarityMatrix, s2: &SimilarityMatrix) -> Result<DistanceCorrelation> {
    ensure_aligned(s1.node_ids(), s2.node_ids())?;
    distance_correlation(&embed_rows(s1), &embed_rows(s2))
}

fn u_centered(d: &Matrix) -> Matrix {
    let n = d.rows();
    let sums: Vec<f64> = (0..n).map(|i| d.row(i).iter().sum()).collect();
    let total: f64 = sums.iter().sum();
    let k1 = 1.0 / (n as f64 - 2.0);
    let k2 = total / ((n as f64 - 1.0) * (n as f64 - 2.0));
    Matrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { d[(i, j)] - (sums[i] + sums[j]) * k1 + k2 })
}

/// Unbiased inner product of U-centered matrices.
fn u_inner(a: &Matrix, b: &Matrix) -> f64 {
    let n = a.rows() as f64;
    // diagonals are zero so the full sum equals the off-diagonal sum
    frobenius_inner(a, b) / (n * (n - 3.0))
}

fn bias_corrected(a: &Matrix, b: &Matrix) -> f64 {
    let denom = u_inner(a, a) * u_inner(b, b);
    if denom <= 0.0 {
        0.0
    } else {
        u_inner(a, b) / libm::sqrt(denom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialDistanceCorrelation {
    /// In `[-1, 1]`; may be negative.
    pub pdcor: f64,
    /// `sqrt(max(pdcor, 0))`.
    pub sqrt_positive: f64,
}

/// Below this, `1 − R*²` counts as zero and the partial correlation is 0.
const DEGENERATE_FACTOR: f64 = 1e-12;

/// Partial distance correlation of `a` and `b` given `z`, built from
/// U-centered distance matrices and bias-corrected distance correlations.
pub fn partial_distance_correlation(
    a: &EmbeddedDistances,
    b: &EmbeddedDistances,
    z: &EmbeddedDistances,
) -> Result<PartialDistanceCorrelation> {
    for other in [b, z] {
        if other.n() != a.n() {
            return Err(Error::DimensionMismatch { left: a.n(), right: other.n() });
        }
    }
    if a.n() < 4 {
        return Err(Error::InsufficientSample { needed: 4, got: a.n() });
    }
    let (ua, ub, uz) = (u_centered(&a.d), u_centered(&b.d), u_centered(&z.d));
    let r_ab = bias_corrected(&ua, &ub);
    let r_az = bias_corrected(&ua, &uz);
    let r_bz = bias_corrected(&ub, &uz);
    let fa = 1.0 - r_az * r_az;
    let fb = 1.0 - r_bz * r_bz;
    let pdcor = if fa < DEGENERATE_FACTOR || fb < DEGENERATE_FACTOR {
        0.0
    } else {
        ((r_ab - r_az * r_bz) / libm::sqrt(fa * fb)).clamp(-1.0, 1.0)
    };
    Ok(PartialDistanceCorrelation { pdcor, sqrt_positive: libm::sqrt(pdcor.max(0.0)) })
}

/// Partial distance correlation between similarity matrices via row embedding.
pub fn matrix_partial_distance_correlation(
    s1: &SimilarityMatrix,
    s2: &SimilarityMatrix,
    given: &SimilarityMatrix,
) -> Result<PartialDistanceCorrelation> {
    ensure_aligned(s1.node_ids(), s2.node_ids())?;
    ensure_aligned(s1.node_ids(), given.node_ids())?;
    partial_distance_correlation(&embed_rows(s1), &embed_rows(s2), &embed_rows(given))
}

/// Cross-tabulation `table[a][b]` = number of nodes in cluster `a` of `p`
/// and cluster `b` of `q`.
pub fn contingency(p: &Partition, q: &Partition) -> Result<Vec<Vec<usize>>> {
    ensure_aligned(p.node_ids(), q.node_ids())?;
    let mut table = vec![vec![0usize; q.num_clusters()]; p.num_clusters()];
    for (&a, &b) in p.labels().iter().zip(q.labels()) {
        table[a][b] += 1;
    }
    Ok(table)
}

/// Cramér's V of a contingency table. Tables with a single row or column give
/// 1 when both margins are single-category and 0 otherwise.
pub fn cramers_v_table(table: &[Vec<usize>]) -> f64 {
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum::<usize>() as f64).collect();
    let cols_n = table.first().map_or(0, Vec::len);
    let cols: Vec<f64> = (0..cols_n).map(|c| table.iter().map(|r| r[c]).sum::<usize>() as f64).collect();
    let r = rows.iter().filter(|&&x| x > 0.0).count();
    let c = cols.iter().filter(|&&x| x > 0.0).count();
    let n: f64 = rows.iter().sum();
    if n == 0.0 {
        return 0.0;
    }
    let k = r.min(c);
    if k <= 1 {
        return if r == 1 && c == 1 { 1.0 } else { 0.0 };
    }
    // χ²/n = Σ O²/(r_i c_j) − 1, which is exact for a perfect association.
    let mut phi2 = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            if o > 0 {
                let o = o as f64;
                phi2 += o * o / (rows[i] * cols[j]);
            }
        }
    }
    libm::sqrt(((phi2 - 1.0) / (k - 1) as f64).max(0.0)).min(1.0)
}

/// Cramér's V between two partitions of the same nodes.
pub fn cramers_v(p: &Partition, q: &Partition) -> Result<f64> {
    Ok(cramers_v_table(&contingency(p, q)?))
}

fn pairs(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// Pair-counting adjusted Rand index. Returns 1 when the index is undefined
/// because both partitions are trivial in the same way.
pub fn adjusted_rand(p: &Partition, q: &Partition) -> Result<f64> {
    let table = contingency(p, q)?;
    let n = p.len() as f64;
    let index: f64 = table.iter().flatten().map(|&x| pairs(x as f64)).sum();
    let sum_a: f64 = table.iter().map(|r| pairs(r.iter().sum::<usize>() as f64)).sum();
    let cols = q.num_clusters();
    let sum_b: f64 = (0..cols).map(|c| pairs(table.iter().map(|r| r[c]).sum::<usize>() as f64)).sum();
    let total = pairs(n);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}
