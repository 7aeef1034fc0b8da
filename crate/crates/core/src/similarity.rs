//! Similarity layers: Jaccard coefficient over cited-reference sets and
//! total-variation similarity over relative-frequency distributions.

use alloc::vec::Vec;

use crate::counts::CountTable;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{BipartiteIncidence, DistributionMatrix, SimilarityMatrix};

/// Size of the intersection of two sorted, deduplicated index lists.
fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                k += 1;
                i += 1;
                j += 1;
            }
        }
    }
    k
}

/// `J_ij = |A_i ∩ A_j| / |A_i ∪ A_j|`, diagonal 1.
pub fn jaccard_layer(b: &BipartiteIncidence) -> SimilarityMatrix {
    let n = b.n_articles();
    let mut m = Matrix::identity(n);
    for i in 0..n {
        let ai = b.row(i);
        for j in (i + 1)..n {
            let aj = b.row(j);
            let inter = intersection_size(ai, aj);
            let v = if inter == 0 { 0.0 } else { inter as f64 / (ai.len() + aj.len() - inter) as f64 };
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    SimilarityMatrix::from_parts_unchecked(m, b.articles().to_vec())
}

/// Normalizes each count row to relative frequencies.
pub fn relative_frequencies(t: &CountTable) -> Result<DistributionMatrix> {
    let mut rows = Vec::with_capacity(t.n_rows());
    for i in 0..t.n_rows() {
        let total = t.row_total(i);
        if total == 0 {
            return Err(Error::ZeroRow(t.row_ids()[i].clone()));
        }
        let total = total as f64;
        rows.push(t.row(i).iter().map(|&(k, c)| (k, c as f64 / total)).collect());
    }
    DistributionMatrix::new(t.row_ids().to_vec(), t.term_ids().to_vec(), rows)
}

/// `Σ_l |p_l − q_l|` over the union of the two sparse supports.
pub(crate) fn sparse_l1(p: &[(usize, f64)], q: &[(usize, f64)], buf: &mut Vec<f64>) -> f64 {
    buf.clear();
    let (mut i, mut j) = (0, 0);
    while i < p.len() || j < q.len() {
        let ci = p.get(i).map_or(usize::MAX, |e| e.0);
        let cj = q.get(j).map_or(usize::MAX, |e| e.0);
        if ci < cj {
            buf.push(libm::fabs(p[i].1));
            i += 1;
        } else if cj < ci {
            buf.push(libm::fabs(q[j].1));
            j += 1;
        } else {
            buf.push(libm::fabs(p[i].1 - q[j].1));
            i += 1;
            j += 1;
        }
    }
    // Summing in value order makes the result independent of column order.
    buf.sort_unstable_by(f64::total_cmp);
    buf.iter().sum()
}

/// `V_ij = 1 − ½ Σ_l |p_il − p_jl|`, diagonal 1, clamped to `[0, 1]`.
pub fn total_variation_layer(d: &DistributionMatrix) -> SimilarityMatrix {
    let n = d.n_rows();
    let mut m = Matrix::identity(n);
    let mut buf = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (1.0 - 0.5 * sparse_l1(d.row(i), d.row(j), &mut buf)).clamp(0.0, 1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    SimilarityMatrix::from_parts_unchecked(m, d.row_ids().to_vec())
}
