//! Similarity Network Fusion by cross diffusion, plus the two hybrid
//! baselines it is compared against: the weighted convex combination and the
//! arccos–cos combination.
//!
//! Each layer `W(v)` yields a full kernel `P(v)` (half of every row's mass on
//! the diagonal, the rest spread proportionally to the similarities) and a
//! sparse kNN kernel `S(v)` restricted to each node's `k` strongest
//! neighbours. One iteration replaces every `P(v)` by
//! `S(v) · mean_{u≠v} P(u) · S(v)ᵀ`, renormalized and symmetrized. The fused
//! network is the symmetrized mean of the final `P(v)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{fill_rows, Matrix};
use crate::model::{ensure_aligned, symmetrize_in_place, MultiplexBundle, SimilarityMatrix};

pub const DEFAULT_K_NEIGHBORS: usize = 20;
pub const DEFAULT_ITERATIONS: usize = 20;

/// Low weights of the fixed-weight convex combinations; the lower weight goes
/// to the layer with the larger total mass.
pub const FIXED_LOW_WEIGHTS: [f64; 3] = [0.5, 0.333, 0.2];

/// Default weight of the arccos–cos combination.
pub const DEFAULT_GLANZEL_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnfConfig {
    pub k_neighbors: usize,
    pub iterations: usize,
}

impl Default for SnfConfig {
    fn default() -> Self {
        Self { k_neighbors: DEFAULT_K_NEIGHBORS, iterations: DEFAULT_ITERATIONS }
    }
}

impl SnfConfig {
    pub fn new(k_neighbors: usize, iterations: usize) -> Self {
        Self { k_neighbors, iterations }
    }

    /// Checks `1 ≤ k ≤ n − 1` and `iterations ≥ 1`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k_neighbors == 0 || self.k_neighbors + 1 > n {
            return Err(Error::Config(format!(
                "k_neighbors = {} must lie in [1, {}]",
                self.k_neighbors,
                n.saturating_sub(1)
            )));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Rescales `m` in place so that every row puts 1/2 on the diagonal and 1/2
/// on the off-diagonal entries in proportion to their values. Rows without
/// off-diagonal mass become identity rows. Returns the isolated rows.
fn normalize_rows(m: &mut Matrix) -> Vec<usize> {
    let n = m.rows();
    let mut isolated = Vec::new();
    for i in 0..n {
        let row = m.row_mut(i);
        let off: f64 = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v).sum();
        if off > 0.0 {
            let scale = 0.5 / off;
            for v in row.iter_mut() {
                *v *= scale;
            }
            row[i] = 0.5;
        } else {
            row.iter_mut().for_each(|v| *v = 0.0);
            row[i] = 1.0;
            isolated.push(i);
        }
    }
    isolated
}

/// Row-stochastic full kernel: `P_ij = w_ij / (2 Σ_{k≠i} w_ik)` off the
/// diagonal and `P_ii = 1/2`; rows without off-diagonal mass get `P_ii = 1`.
pub fn full_kernel(w: &SimilarityMatrix) -> Matrix {
    let mut p = w.values().clone();
    normalize_rows(&mut p);
    p
}

/// Row-sparse matrix; each row lists `(column, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseKernel {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseKernel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i].iter().find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// The `k` off-diagonal columns of row `i` with the largest weights, ties
/// broken towards the smaller column index. Returned in that order.
fn nearest(row: &[f64], i: usize, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row.len()).filter(|&j| j != i).collect();
    let by_weight = |a: &usize, b: &usize| row[*b].total_cmp(&row[*a]).then(a.cmp(b));
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, by_weight);
        idx.truncate(k);
    }
    idx.sort_unstable_by(by_weight);
    idx
}

fn knn_rows(w: &SimilarityMatrix, k: usize, isolated_as_identity: bool) -> Result<(SparseKernel, Vec<usize>)> {
    let n = w.n();
    if k == 0 || k >= n {
        return Err(Error::Config(format!("k = {k} must lie in [1, {}]", n.saturating_sub(1))));
    }
    let mut rows = Vec::with_capacity(n);
    let mut isolated = Vec::new();
    for i in 0..n {
        let row = w.values().row(i);
        let nbrs = nearest(row, i, k);
        let mass: f64 = nbrs.iter().map(|&j| row[j]).sum();
        if mass > 0.0 {
            rows.push(nbrs.into_iter().map(|j| (j, row[j] / mass)).collect());
        } else if isolated_as_identity {
            isolated.push(i);
            rows.push(vec![(i, 1.0)]);
        } else {
            return Err(Error::DegenerateNeighborhood { row: i });
        }
    }
    Ok((SparseKernel { n, rows }, isolated))
}

/// Local kernel restricted to each node's `k` nearest neighbours:
/// `S_ij = w_ij / Σ_{l∈N_i} w_il` for `j ∈ N_i`, else 0.
pub fn knn_kernel(w: &SimilarityMatrix, k: usize) -> Result<SparseKernel> {
    knn_rows(w, k, false).map(|(s, _)| s)
}

/// `S · M · Sᵀ` for row-sparse `S`.
fn sandwich(s: &SparseKernel, m: &Matrix) -> Matrix {
    let n = s.n;
    let mut left = Matrix::zeros(n, n);
    fill_rows(&mut left, |i, out| {
        for &(a, w) in &s.rows[i] {
            for (o, &v) in out.iter_mut().zip(m.row(a)) {
                *o += w * v;
            }
        }
    });
    let mut result = Matrix::zeros(n, n);
    fill_rows(&mut result, |i, out| {
        let l = left.row(i);
        for (j, o) in out.iter_mut().enumerate() {
            *o = s.rows[j].iter().map(|&(b, w)| l[b] * w).sum();
        }
    });
    result
}

/// Iterative state of the cross-diffusion process over a bundle.
#[derive(Debug, Clone)]
pub struct CrossDiffusion {
    node_ids: Vec<alloc::string::String>,
    local: Vec<SparseKernel>,
    views: Vec<Matrix>,
    deltas: Vec<f64>,
    isolated: Vec<Vec<usize>>,
}

impl CrossDiffusion {
    pub fn new(bundle: &MultiplexBundle, cfg: &SnfConfig) -> Result<Self> {
        if bundle.len() < 2 {
            return Err(Error::Config(format!("fusion needs at least 2 layers, got {}", bundle.len())));
        }
        cfg.validate(bundle.n())?;
        let mut local = Vec::with_capacity(bundle.len());
        let mut views = Vec::with_capacity(bundle.len());
        let mut isolated = Vec::with_capacity(bundle.len());
        for layer in bundle.layers() {
            let (s, iso) = knn_rows(layer, cfg.k_neighbors, true)?;
            local.push(s);
            isolated.push(iso);
            views.push(full_kernel(layer));
        }
        Ok(Self { node_ids: bundle.node_ids().to_vec(), local, views, deltas: Vec::new(), isolated })
    }

    /// One cross-diffusion update of every view. Returns the largest
    /// elementwise change over all views.
    pub fn step(&mut self) -> f64 {
        let m = self.views.len();
        let n = self.node_ids.len();
        let mut next = Vec::with_capacity(m);
        for v in 0..m {
            let mut others = Matrix::zeros(n, n);
            for (u, p) in self.views.iter().enumerate() {
                if u != v {
                    for (o, &x) in others.as_mut_slice().iter_mut().zip(p.as_slice()) {
                        *o += x;
                    }
                }
            }
            let inv = 1.0 / (m - 1) as f64;
            others.as_mut_slice().iter_mut().for_each(|x| *x *= inv);
            let mut p = sandwich(&self.local[v], &others);
            normalize_rows(&mut p);
            symmetrize_in_place(&mut p);
            next.push(p);
        }
        let delta = self.views.iter().zip(&next).fold(0.0, |acc, (a, b)| f64::max(acc, a.max_abs_diff(b)));
        self.views = next;
        self.deltas.push(delta);
        delta
    }

    /// Current diffused matrix of every view.
    pub fn views(&self) -> &[Matrix] {
        &self.views
    }

    /// Largest elementwise change recorded at each completed iteration.
    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    /// Per layer, nodes with no off-diagonal similarity; these carry identity
    /// rows through diffusion.
    pub fn isolated(&self) -> &[Vec<usize>] {
        &self.isolated
    }

    /// Symmetrized mean of the current views.
    pub fn fused(&self) -> SimilarityMatrix {
        let n = self.node_ids.len();
        let mut mean = Matrix::zeros(n, n);
        for p in &self.views {
            for (o, &x) in mean.as_mut_slice().iter_mut().zip(p.as_slice()) {
                *o += x;
            }
        }
        let inv = 1.0 / self.views.len() as f64;
        mean.as_mut_slice().iter_mut().for_each(|x| *x = (*x * inv).max(0.0));
        symmetrize_in_place(&mut mean);
        SimilarityMatrix::from_parts_unchecked(mean, self.node_ids.clone())
    }
}

/// Outcome of a full fusion run.
#[derive(Debug, Clone)]
pub struct SnfRun {
    pub fused: SimilarityMatrix,
    pub deltas: Vec<f64>,
    pub isolated: Vec<Vec<usize>>,
}

/// Runs `cfg.iterations` cross-diffusion steps and returns the fused network
/// together with the per-iteration changes.
pub fn snf_run(bundle: &MultiplexBundle, cfg: &SnfConfig) -> Result<SnfRun> {
    let mut cdp = CrossDiffusion::new(bundle, cfg)?;
    for _ in 0..cfg.iterations {
        cdp.step();
    }
    Ok(SnfRun { fused: cdp.fused(), deltas: cdp.deltas, isolated: cdp.isolated })
}

/// Fused similarity network of all layers in `bundle`.
pub fn snf(bundle: &MultiplexBundle, cfg: &SnfConfig) -> Result<SimilarityMatrix> {
    snf_run(bundle, cfg).map(|r| r.fused)
}

/// `α = T2 / (T1 + T2)` where `T_v` is the total mass of layer `v`.
pub fn boyack_alpha(s1: &SimilarityMatrix, s2: &SimilarityMatrix) -> Result<f64> {
    let (t1, t2) = (s1.total(), s2.total());
    if t1 + t2 <= 0.0 {
        return Err(Error::ZeroMass);
    }
    Ok(t2 / (t1 + t2))
}

/// Weight of `s1` in a fixed-weight combination where the layer with the
/// larger total receives `low_weight`.
pub fn fixed_weight_alpha(s1: &SimilarityMatrix, s2: &SimilarityMatrix, low_weight: f64) -> f64 {
    if s1.total() >= s2.total() {
        low_weight
    } else {
        1.0 - low_weight
    }
}

/// `α · s1 + (1 − α) · s2`.
pub fn convex_combination(s1: &SimilarityMatrix, s2: &SimilarityMatrix, alpha: f64) -> Result<SimilarityMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Config(format!("alpha = {alpha} not in [0, 1]")));
    }
    ensure_aligned(s1.node_ids(), s2.node_ids())?;
    let beta = 1.0 - alpha;
    let data = s1
        .values()
        .as_slice()
        .iter()
        .zip(s2.values().as_slice())
        .map(|(&a, &b)| alpha * a + beta * b)
        .collect();
    let n = s1.n();
    Ok(SimilarityMatrix::from_parts_unchecked(Matrix::from_vec(n, n, data), s1.node_ids().to_vec()))
}

/// `cos(w · arccos(s1) + (1 − w) · arccos(s2))` elementwise.
pub fn glanzel_combination(s1: &SimilarityMatrix, s2: &SimilarityMatrix, w: f64) -> Result<SimilarityMatrix> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::Config(format!("w = {w} not in [0, 1]")));
    }
    ensure_aligned(s1.node_ids(), s2.node_ids())?;
    let n = s1.n();
    for s in [s1, s2] {
        for i in 0..n {
            for j in 0..n {
                let v = s.get(i, j);
                if !(-1.0..=1.0).contains(&v) {
                    return Err(Error::Domain { i, j, value: v });
                }
            }
        }
    }
    let data = s1
        .values()
        .as_slice()
        .iter()
        .zip(s2.values().as_slice())
        .map(|(&a, &b)| libm::cos(w * libm::acos(a) + (1.0 - w) * libm::acos(b)).clamp(0.0, 1.0))
        .collect();
    Ok(SimilarityMatrix::from_parts_unchecked(Matrix::from_vec(n, n, data), s1.node_ids().to_vec()))
}
