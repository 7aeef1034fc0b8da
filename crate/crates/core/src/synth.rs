//! Planted-partition multiplex generator with known ground truth.
//!
//! Similarities are drawn directly: a pair in the same effective block of a
//! layer gets `clamp(N(μ_in, σ²), 0, 1)`, any other pair
//! `clamp(N(μ_out, σ²), 0, 1)`. A layer's merge groups make several true
//! blocks a single effective block, so the layer cannot tell them apart.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{MultiplexBundle, Partition, SimilarityMatrix};

pub const DEFAULT_MU_IN: f64 = 0.6;
pub const DEFAULT_MU_OUT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    pub mu_in: f64,
    pub mu_out: f64,
    pub sigma: f64,
    /// Groups of block indices this layer cannot distinguish.
    pub merge: Vec<Vec<usize>>,
}

impl LayerSpec {
    pub fn new(mu_in: f64, mu_out: f64, sigma: f64) -> Self {
        Self { mu_in, mu_out, sigma, merge: Vec::new() }
    }

    pub fn with_merge(mut self, merge: Vec<Vec<usize>>) -> Self {
        self.merge = merge;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    pub n: usize,
    pub blocks: Vec<usize>,
    pub layers: Vec<LayerSpec>,
    pub seed: u64,
}

/// A generated bundle together with its ground-truth blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Planted {
    pub bundle: MultiplexBundle,
    pub truth: Partition,
}

impl PlantedSpec {
    pub fn validate(&self) -> Result<()> {
        let total: usize = self.blocks.iter().sum();
        if total != self.n {
            return Err(Error::Spec(format!("block sizes sum to {total}, expected n = {}", self.n)));
        }
        if self.blocks.contains(&0) {
            return Err(Error::Spec("empty block".into()));
        }
        if self.layers.is_empty() {
            return Err(Error::Spec("no layers".into()));
        }
        for (v, l) in self.layers.iter().enumerate() {
            if !(0.0 <= l.mu_out && l.mu_out <= l.mu_in && l.mu_in <= 1.0) {
                return Err(Error::Spec(format!("layer {v}: need 0 <= mu_out <= mu_in <= 1")));
            }
            if !(l.sigma >= 0.0 && l.sigma.is_finite()) {
                return Err(Error::Spec(format!("layer {v}: sigma must be finite and >= 0")));
            }
            let mut used = vec![false; self.blocks.len()];
            for &b in l.merge.iter().flatten() {
                if b >= self.blocks.len() {
                    return Err(Error::Spec(format!("layer {v}: merge references block {b}")));
                }
                if core::mem::replace(&mut used[b], true) {
                    return Err(Error::Spec(format!("layer {v}: block {b} merged twice")));
                }
            }
        }
        Ok(())
    }

    fn truth_labels(&self) -> Vec<usize> {
        self.blocks.iter().enumerate().flat_map(|(b, &size)| core::iter::repeat_n(b, size)).collect()
    }
}

/// Effective block of each true block in a layer.
fn effective_blocks(n_blocks: usize, merge: &[Vec<usize>]) -> Vec<usize> {
    let mut eff: Vec<usize> = (0..n_blocks).collect();
    for group in merge {
        if let Some(&first) = group.iter().min() {
            for &b in group {
                eff[b] = first;
            }
        }
    }
    eff
}

pub fn node_ids(n: usize) -> Vec<alloc::string::String> {
    (0..n).map(|i| format!("n{i}")).collect()
}

/// Draws every layer of `spec`. Deterministic for a fixed seed.
pub fn planted_multiplex(spec: &PlantedSpec) -> Result<Planted> {
    spec.validate()?;
    let truth = spec.truth_labels();
    let ids = node_ids(spec.n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut layers = Vec::with_capacity(spec.layers.len());
    for l in &spec.layers {
        let eff = effective_blocks(spec.blocks.len(), &l.merge);
        let mut m = Matrix::identity(spec.n);
        for i in 0..spec.n {
            for j in (i + 1)..spec.n {
                let mu = if eff[truth[i]] == eff[truth[j]] { l.mu_in } else { l.mu_out };
                let z: f64 = rng.sample(StandardNormal);
                let v = (mu + l.sigma * z).clamp(0.0, 1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        layers.push(SimilarityMatrix::new(m, ids.clone())?);
    }
    Ok(Planted { bundle: MultiplexBundle::new(layers)?, truth: Partition::new(truth, ids)? })
}

/// `n` nodes split into `k` blocks whose sizes differ by at most one.
pub fn balanced_blocks(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|b| n / k + usize::from(b < n % k)).collect()
}

/// Two-layer spec where layer 1 merges blocks (1,2),(3,4),… and layer 2
/// merges (2,3),…,(k,1); only both layers together resolve all `k` blocks.
pub fn complementary_spec(n: usize, k: usize, mu_in: f64, mu_out: f64, sigma: f64, seed: u64) -> Result<PlantedSpec> {
    if k < 4 || !k.is_multiple_of(2) {
        return Err(Error::Spec(format!("k = {k} must be even and at least 4")));
    }
    if n < k {
        return Err(Error::Spec(format!("n = {n} smaller than k = {k}")));
    }
    let first: Vec<Vec<usize>> = (0..k / 2).map(|p| vec![2 * p, 2 * p + 1]).collect();
    let second: Vec<Vec<usize>> = (0..k / 2).map(|p| vec![2 * p + 1, (2 * p + 2) % k]).collect();
    Ok(PlantedSpec {
        n,
        blocks: balanced_blocks(n, k),
        layers: vec![
            LayerSpec::new(mu_in, mu_out, sigma).with_merge(first),
            LayerSpec::new(mu_in, mu_out, sigma).with_merge(second),
        ],
        seed,
    })
}

/// [`complementary_spec`] with the default means, drawn.
pub fn complementary_pair(n: usize, k: usize, sigma: f64, seed: u64) -> Result<Planted> {
    planted_multiplex(&complementary_spec(n, k, DEFAULT_MU_IN, DEFAULT_MU_OUT, sigma, seed)?)
}
