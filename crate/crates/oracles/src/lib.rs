//! Slow, direct reference implementations used only by tests.
//!
//! Every function here works on plain nested vectors and follows a different
//! computational route from the production code: set enumeration instead of
//! merge-intersections, pair enumeration instead of contingency tables, the
//! three-term form of distance covariance instead of double centering, and
//! Hilbert-space projection for the partial distance correlation.

#![allow(clippy::needless_range_loop)]

use std::collections::{BTreeSet, HashMap};

pub type Dense = Vec<Vec<f64>>;

/// Jaccard coefficient of every pair of sets; diagonal 1.
pub fn jaccard(sets: &[BTreeSet<usize>]) -> Dense {
    let n = sets.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let inter = sets[i].intersection(&sets[j]).count();
            let union = sets[i].union(&sets[j]).count();
            out[i][j] = if i == j { 1.0 } else { inter as f64 / union as f64 };
        }
    }
    out
}

/// `1 − ½ Σ |p − q|` over dense rows.
pub fn total_variation(rows: &Dense) -> Dense {
    let n = rows.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let l1: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b).abs()).sum();
            out[i][j] = 1.0 - 0.5 * l1;
        }
    }
    out
}

/// Literal double sum `(1/2m) Σ_ij (A_ij − k_i k_j / 2m) δ(c_i, c_j)`.
pub fn modularity(adj: &Dense, labels: &[usize]) -> f64 {
    let n = adj.len();
    let k: Vec<f64> = adj.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += adj[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Cramér's V from label vectors, with the single-category convention
/// (1 if both labelings are constant, else 0).
pub fn cramers_v(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut ma: HashMap<usize, f64> = HashMap::new();
    let mut mb: HashMap<usize, f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1.0;
        *ma.entry(x).or_default() += 1.0;
        *mb.entry(y).or_default() += 1.0;
    }
    let k = ma.len().min(mb.len());
    if k < 2 {
        return if ma.len() == 1 && mb.len() == 1 { 1.0 } else { 0.0 };
    }
    let mut chi2 = 0.0;
    for (&x, &rx) in &ma {
        for (&y, &cy) in &mb {
            let e = rx * cy / n;
            let o = joint.get(&(x, y)).copied().unwrap_or(0.0);
            chi2 += (o - e) * (o - e) / e;
        }
    }
    (chi2 / (n * (k - 1) as f64)).sqrt()
}

/// Adjusted Rand index from explicit enumeration of all node pairs, using the
/// 2×2 pair-agreement table form. Returns 1 when undefined.
pub fn adjusted_rand(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut ss, mut sd, mut ds, mut dd) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        for j in (i + 1)..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => ss += 1.0,
                (true, false) => sd += 1.0,
                (false, true) => ds += 1.0,
                (false, false) => dd += 1.0,
            }
        }
    }
    let denom = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd);
    if denom == 0.0 {
        return 1.0;
    }
    2.0 * (ss * dd - sd * ds) / denom
}

/// Euclidean distances between rows.
pub fn row_distances(m: &Dense) -> Dense {
    let n = m.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = m[i].iter().zip(&m[j]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        }
    }
    d
}

/// `S1 + S2 − 2 S3` form of the squared sample distance covariance.
fn dcov2(a: &Dense, b: &Dense) -> f64 {
    let n = a.len() as f64;
    let mut s1 = 0.0;
    let (mut sa, mut sb) = (0.0, 0.0);
    let mut s3 = 0.0;
    for i in 0..a.len() {
        for j in 0..a.len() {
            s1 += a[i][j] * b[i][j];
            sa += a[i][j];
            sb += b[i][j];
            for k in 0..a.len() {
                s3 += a[i][j] * b[i][k];
            }
        }
    }
    s1 / (n * n) + (sa / (n * n)) * (sb / (n * n)) - 2.0 * s3 / (n * n * n)
}

/// Squared distance correlation of two distance matrices.
pub fn dcor_sq(a: &Dense, b: &Dense) -> f64 {
    let vab = dcov2(a, b);
    let va = dcov2(a, a);
    let vb = dcov2(b, b);
    if va <= 0.0 || vb <= 0.0 {
        return 0.0;
    }
    vab.max(0.0) / (va * vb).sqrt()
}

fn u_center(d: &Dense) -> Dense {
    let n = d.len();
    let nf = n as f64;
    let mut out = vec![vec![0.0; n]; n];
    let total: f64 = d.iter().flatten().sum();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let row_i: f64 = (0..n).map(|l| d[i][l]).sum();
            let col_j: f64 = (0..n).map(|k| d[k][j]).sum();
            out[i][j] = d[i][j] - row_i / (nf - 2.0) - col_j / (nf - 2.0) + total / ((nf - 1.0) * (nf - 2.0));
        }
    }
    out
}

fn u_dot(a: &Dense, b: &Dense) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i][j] * b[i][j];
            }
        }
    }
    s / (n as f64 * (n as f64 - 3.0))
}

/// Partial distance correlation by projecting the U-centered `x` and `y`
/// onto the orthogonal complement of the U-centered `z`.
pub fn pdcor(x: &Dense, y: &Dense, z: &Dense) -> f64 {
    let (ux, uy, uz) = (u_center(x), u_center(y), u_center(z));
    let zz = u_dot(&uz, &uz);
    let project = |u: &Dense| -> Dense {
        if zz <= 0.0 {
            return u.clone();
        }
        let c = u_dot(u, &uz) / zz;
        u.iter().zip(&uz).map(|(r, rz)| r.iter().zip(rz).map(|(a, b)| a - c * b).collect()).collect()
    };
    let (px, py) = (project(&ux), project(&uy));
    let (xx, yy) = (u_dot(&px, &px), u_dot(&py, &py));
    if xx <= 0.0 || yy <= 0.0 {
        return 0.0;
    }
    u_dot(&px, &py) / (xx * yy).sqrt()
}
