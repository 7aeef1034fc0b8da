//! Weighted modularity and Louvain community detection.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{ensure_aligned, zero_diagonal, Partition, SimilarityMatrix};

/// Minimum modularity gain for a local move to be accepted.
pub const GAIN_THRESHOLD: f64 = 1e-12;

/// Undirected weighted graph without self-loops, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adjacency: Matrix,
    node_ids: Vec<String>,
    degrees: Vec<f64>,
    two_m: f64,
}

impl WeightedGraph {
    /// `adjacency` must be a valid similarity matrix with a zero diagonal.
    pub fn new(adjacency: SimilarityMatrix) -> Result<Self> {
        let n = adjacency.n();
        if let Some(i) = (0..n).find(|&i| adjacency.get(i, i) != 0.0) {
            return Err(Error::Config(alloc::format!("self-loop at node {i}")));
        }
        let (adjacency, node_ids) = adjacency.into_parts();
        let degrees: Vec<f64> = (0..n).map(|i| adjacency.row(i).iter().sum()).collect();
        let two_m = degrees.iter().sum();
        Ok(Self { adjacency, node_ids, degrees, two_m })
    }

    pub fn n(&self) -> usize {
        self.node_ids.len()
    }

    pub fn adjacency(&self) -> &Matrix {
        &self.adjacency
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.degrees[i]
    }

    /// Total edge weight `m = ½ Σ_ij A_ij`.
    pub fn total_weight(&self) -> f64 {
        0.5 * self.two_m
    }

    /// Same graph with every weight multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        let adjacency = self.adjacency.map(|v| v * c);
        let degrees: Vec<f64> = (0..self.n()).map(|i| adjacency.row(i).iter().sum()).collect();
        let two_m = degrees.iter().sum();
        Self { adjacency, node_ids: self.node_ids.clone(), degrees, two_m }
    }
}

/// Drops self-similarities and wraps the result as a graph.
pub fn graph_from_similarity(s: &SimilarityMatrix) -> Result<WeightedGraph> {
    let g = WeightedGraph::new(zero_diagonal(s))?;
    if g.two_m <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    Ok(g)
}

/// Modularity with resolution `γ`:
/// `Σ_c [ in_c / 2m − γ (tot_c / 2m)² ]`.
pub fn modularity_with_resolution(g: &WeightedGraph, p: &Partition, resolution: f64) -> Result<f64> {
    ensure_aligned(g.node_ids(), p.node_ids())?;
    if g.two_m <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    let labels = p.labels();
    let c = p.num_clusters();
    let mut inside = vec![0.0; c];
    let mut tot = vec![0.0; c];
    for i in 0..g.n() {
        let ci = labels[i];
        let row_in: f64 = g.adjacency.row(i).iter().zip(labels).filter(|(_, &cj)| cj == ci).map(|(w, _)| w).sum();
        inside[ci] += row_in;
        tot[ci] += g.degrees[i];
    }
    let two_m: f64 = g.degrees.iter().sum();
    Ok(inside
        .iter()
        .zip(&tot)
        .map(|(&i, &t)| i / two_m - resolution * (t / two_m) * (t / two_m))
        .sum())
}

/// Newman modularity of `p` on `g`.
pub fn modularity(g: &WeightedGraph, p: &Partition) -> Result<f64> {
    modularity_with_resolution(g, p, 1.0)
}

/// Coarse graph at one Louvain level. Edges exclude self-loops, which are
/// tracked separately.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    degree: Vec<f64>,
}

impl Level {
    fn n(&self) -> usize {
        self.adj.len()
    }

    fn aggregate(&self, community: &[usize], count: usize) -> Level {
        let mut dense: Vec<Vec<(usize, f64)>> = vec![Vec::new(); count];
        let mut self_loops = vec![0.0; count];
        let mut degree = vec![0.0; count];
        let mut acc = vec![0.0; count];
        let mut touched = Vec::new();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
        for (i, &c) in community.iter().enumerate() {
            members[c].push(i);
        }
        for (c, nodes) in members.iter().enumerate() {
            for &i in nodes {
                degree[c] += self.degree[i];
                self_loops[c] += self.self_loops[i];
                for &(j, w) in &self.adj[i] {
                    let cj = community[j];
                    if cj == c {
                        self_loops[c] += w;
                    } else {
                        if acc[cj] == 0.0 {
                            touched.push(cj);
                        }
                        acc[cj] += w;
                    }
                }
            }
            touched.sort_unstable();
            dense[c] = touched.iter().map(|&d| (d, acc[d])).collect();
            for &d in &touched {
                acc[d] = 0.0;
            }
            touched.clear();
        }
        Level { adj: dense, self_loops, degree }
    }
}

/// Greedy local moving on one level. Returns the number of accepted moves.
fn local_moving(level: &Level, community: &mut [usize], two_m: f64, resolution: f64, rng: &mut ChaCha8Rng) -> usize {
    let n = level.n();
    let mut tot = vec![0.0; n];
    for i in 0..n {
        tot[community[i]] += level.degree[i];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut weight_to = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut moves = 0;
    loop {
        let mut moved = false;
        for &i in &order {
            let ci = community[i];
            let ki = level.degree[i];
            for &(j, w) in &level.adj[i] {
                let cj = community[j];
                if !seen[cj] {
                    seen[cj] = true;
                    touched.push(cj);
                }
                weight_to[cj] += w;
            }
            tot[ci] -= ki;
            let gain = |tot_c: f64, w: f64| 2.0 * w / two_m - 2.0 * resolution * tot_c * ki / (two_m * two_m);
            let stay = gain(tot[ci], weight_to[ci]);
            touched.sort_unstable();
            let mut best = ci;
            let mut best_gain = f64::NEG_INFINITY;
            for &c in &touched {
                let g = gain(tot[c], weight_to[c]);
                if g > best_gain {
                    best_gain = g;
                    best = c;
                }
            }
            let target = if best != ci && best_gain - stay > GAIN_THRESHOLD { best } else { ci };
            tot[target] += ki;
            if target != ci {
                community[i] = target;
                moved = true;
                moves += 1;
            }
            for &c in &touched {
                weight_to[c] = 0.0;
                seen[c] = false;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
    }
    moves
}

/// Compacts community ids to `0..count` preserving first appearance.
fn renumber(community: &mut [usize]) -> usize {
    let mut map = vec![usize::MAX; community.len()];
    let mut next = 0;
    for c in community.iter_mut() {
        if map[*c] == usize::MAX {
            map[*c] = next;
            next += 1;
        }
        *c = map[*c];
    }
    next
}

/// Result of a Louvain run.
#[derive(Debug, Clone, PartialEq)]
pub struct LouvainRun {
    pub partition: Partition,
    /// Modularity after each level, starting with the all-singleton partition.
    pub phase_modularity: Vec<f64>,
}

/// Louvain community detection with node visit order shuffled by `seed`.
/// Nodes without edges are left as singleton communities.
pub fn louvain_run(g: &WeightedGraph, seed: u64, resolution: f64) -> Result<LouvainRun> {
    if g.two_m <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    let n = g.n();
    let connected: Vec<usize> = (0..n).filter(|&i| g.degrees[i] > 0.0).collect();
    let mut local_index = vec![usize::MAX; n];
    for (k, &i) in connected.iter().enumerate() {
        local_index[i] = k;
    }
    let adj = connected
        .iter()
        .map(|&i| {
            g.adjacency
                .row(i)
                .iter()
                .enumerate()
                .filter(|&(j, &w)| w > 0.0 && j != i)
                .map(|(j, &w)| (local_index[j], w))
                .collect()
        })
        .collect();
    let mut level = Level {
        adj,
        self_loops: vec![0.0; connected.len()],
        degree: connected.iter().map(|&i| g.degrees[i]).collect(),
    };
    let two_m = g.two_m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // membership[k] = community of connected node k at the current level
    let mut membership: Vec<usize> = (0..connected.len()).collect();

    let assemble = |membership: &[usize]| -> Result<Partition> {
        let mut labels = vec![0usize; n];
        let offset = connected.len();
        let mut isolated = 0;
        for i in 0..n {
            labels[i] = if local_index[i] == usize::MAX {
                isolated += 1;
                offset + isolated
            } else {
                membership[local_index[i]]
            };
        }
        Partition::new(labels, g.node_ids.clone())
    };

    let mut phase_modularity = vec![modularity_with_resolution(g, &assemble(&membership)?, resolution)?];
    loop {
        let mut community: Vec<usize> = (0..level.n()).collect();
        let moves = local_moving(&level, &mut community, two_m, resolution, &mut rng);
        if moves == 0 {
            break;
        }
        let count = renumber(&mut community);
        for m in membership.iter_mut() {
            *m = community[*m];
        }
        let q = modularity_with_resolution(g, &assemble(&membership)?, resolution)?;
        debug_assert!(q + 1e-9 >= *phase_modularity.last().unwrap(), "modularity decreased");
        phase_modularity.push(q);
        if count == level.n() {
            break;
        }
        level = level.aggregate(&community, count);
    }
    Ok(LouvainRun { partition: assemble(&membership)?, phase_modularity })
}

/// Louvain partition of `g`.
pub fn louvain(g: &WeightedGraph, seed: u64, resolution: f64) -> Result<Partition> {
    louvain_run(g, seed, resolution).map(|r| r.partition)
}
