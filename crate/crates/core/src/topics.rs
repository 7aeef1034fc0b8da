//! Latent Dirichlet Allocation fitted by collapsed Gibbs sampling.
//!
//! Document–topic distributions are estimated by averaging
//! `(n_dk + α) / (n_d + Kα)` over every post-burn-in sweep.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::counts::CountTable;
use crate::error::{Error, Result};
use crate::model::DistributionMatrix;

pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_SWEEPS: usize = 1000;
pub const DEFAULT_BURN_IN: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaConfig {
    pub k_topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub sweeps: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl LdaConfig {
    /// Defaults: `alpha = 50 / K`, `beta = 0.01`, 1000 sweeps with 500 burn-in.
    pub fn new(k_topics: usize) -> Self {
        Self {
            k_topics,
            alpha: 50.0 / k_topics.max(1) as f64,
            beta: DEFAULT_BETA,
            sweeps: DEFAULT_SWEEPS,
            burn_in: DEFAULT_BURN_IN,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_topics == 0 {
            return Err(Error::Config("k_topics must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) || !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("priors must be positive (alpha = {}, beta = {})", self.alpha, self.beta)));
        }
        if self.sweeps <= self.burn_in {
            return Err(Error::Config(format!("sweeps ({}) must exceed burn_in ({})", self.sweeps, self.burn_in)));
        }
        Ok(())
    }
}

/// Collapsed Gibbs sampler state.
#[derive(Debug, Clone)]
pub struct GibbsSampler {
    k: usize,
    n_words: usize,
    alpha: f64,
    beta: f64,
    words: Vec<u32>,
    doc_start: Vec<usize>,
    topics: Vec<u32>,
    doc_topic: Vec<u32>,
    word_topic: Vec<u32>,
    topic_total: Vec<u32>,
    weights: Vec<f64>,
    rng: ChaCha8Rng,
}

impl GibbsSampler {
    /// Expands counts into tokens and assigns each a uniformly random topic.
    pub fn new(t: &CountTable, cfg: &LdaConfig) -> Result<Self> {
        cfg.validate()?;
        if t.total_tokens() == 0 {
            return Err(Error::EmptyCorpus);
        }
        let k = cfg.k_topics;
        let mut words = Vec::with_capacity(t.total_tokens() as usize);
        let mut doc_start = Vec::with_capacity(t.n_rows() + 1);
        for d in 0..t.n_rows() {
            doc_start.push(words.len());
            for &(w, c) in t.row(d) {
                words.extend(core::iter::repeat_n(w as u32, c as usize));
            }
        }
        doc_start.push(words.len());
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut s = Self {
            k,
            n_words: t.n_terms(),
            alpha: cfg.alpha,
            beta: cfg.beta,
            topics: vec![0; words.len()],
            doc_topic: vec![0; t.n_rows() * k],
            word_topic: vec![0; t.n_terms() * k],
            topic_total: vec![0; k],
            weights: vec![0.0; k],
            words,
            doc_start,
            rng: ChaCha8Rng::seed_from_u64(0),
        };
        for d in 0..s.n_docs() {
            for i in s.doc_start[d]..s.doc_start[d + 1] {
                let z = rng.random_range(0..k as u32);
                s.topics[i] = z;
                s.adjust(d, s.words[i] as usize, z as usize, true);
            }
        }
        s.rng = rng;
        Ok(s)
    }

    pub fn n_docs(&self) -> usize {
        self.doc_start.len() - 1
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    fn adjust(&mut self, d: usize, w: usize, z: usize, add: bool) {
        let (dt, wt, tt) = (&mut self.doc_topic[d * self.k + z], &mut self.word_topic[w * self.k + z], &mut self.topic_total[z]);
        if add {
            *dt += 1;
            *wt += 1;
            *tt += 1;
        } else {
            *dt -= 1;
            *wt -= 1;
            *tt -= 1;
        }
    }

    /// Resamples the topic of every token once, in document order.
    pub fn sweep(&mut self) {
        let k = self.k;
        let v_beta = self.n_words as f64 * self.beta;
        for d in 0..self.n_docs() {
            for i in self.doc_start[d]..self.doc_start[d + 1] {
                let w = self.words[i] as usize;
                let old = self.topics[i] as usize;
                self.adjust(d, w, old, false);
                let dt = &self.doc_topic[d * k..(d + 1) * k];
                let wt = &self.word_topic[w * k..(w + 1) * k];
                let mut total = 0.0;
                for z in 0..k {
                    total += (dt[z] as f64 + self.alpha) * (wt[z] as f64 + self.beta)
                        / (self.topic_total[z] as f64 + v_beta);
                    self.weights[z] = total;
                }
                let u = self.rng.random::<f64>() * total;
                let new = self.weights.iter().position(|&c| u < c).unwrap_or(k - 1);
                self.topics[i] = new as u32;
                self.adjust(d, w, new, true);
            }
        }
    }

    /// Topic counts `n_dk` of document `d`.
    pub fn doc_topic_counts(&self, d: usize) -> &[u32] {
        &self.doc_topic[d * self.k..(d + 1) * self.k]
    }

    /// Current point estimate `(n_dk + α) / (n_d + Kα)` for document `d`.
    pub fn theta(&self, d: usize) -> Vec<f64> {
        let counts = self.doc_topic_counts(d);
        let n_d = (self.doc_start[d + 1] - self.doc_start[d]) as f64;
        let denom = n_d + self.k as f64 * self.alpha;
        counts.iter().map(|&c| (c as f64 + self.alpha) / denom).collect()
    }
}

/// Fits LDA on `t` and returns the document–topic distributions.
pub fn fit_lda(t: &CountTable, cfg: &LdaConfig) -> Result<DistributionMatrix> {
    let mut sampler = GibbsSampler::new(t, cfg)?;
    let k = cfg.k_topics;
    let mut acc = vec![0.0; sampler.n_docs() * k];
    for s in 0..cfg.sweeps {
        sampler.sweep();
        if s >= cfg.burn_in {
            for d in 0..sampler.n_docs() {
                for (a, th) in acc[d * k..(d + 1) * k].iter_mut().zip(sampler.theta(d)) {
                    *a += th;
                }
            }
        }
    }
    let samples = (cfg.sweeps - cfg.burn_in) as f64;
    let rows = acc.chunks(k).map(|r| r.iter().enumerate().map(|(z, &a)| (z, a / samples)).collect()).collect();
    let cols = (0..k).map(|z| format!("topic_{z}")).collect();
    DistributionMatrix::new(t.row_ids().to_vec(), cols, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> CountTable {
        CountTable::from_triples(&[("a", "x", 3), ("a", "y", 1), ("b", "y", 2), ("b", "z", 5)]).unwrap()
    }

    #[test]
    fn single_topic_is_degenerate() {
        let mut cfg = LdaConfig::new(1);
        cfg.sweeps = 20;
        cfg.burn_in = 5;
        let th = fit_lda(&corpus(), &cfg).unwrap();
        for d in 0..2 {
            assert_eq!(th.row(d), &[(0, 1.0)]);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let mut cfg = LdaConfig::new(3);
        cfg.sweeps = 50;
        cfg.burn_in = 10;
        cfg.seed = 42;
        assert_eq!(fit_lda(&corpus(), &cfg).unwrap(), fit_lda(&corpus(), &cfg).unwrap());
    }

    #[test]
    fn config_errors() {
        let mut cfg = LdaConfig::new(2);
        cfg.burn_in = cfg.sweeps;
        assert!(matches!(fit_lda(&corpus(), &cfg), Err(Error::Config(_))));
        assert!(LdaConfig::new(0).validate().is_err());
        let empty = CountTable::from_triples(&[("a", "x", 0)]).unwrap();
        assert_eq!(fit_lda(&empty, &LdaConfig::new(2)).unwrap_err(), Error::EmptyCorpus);
    }
}
