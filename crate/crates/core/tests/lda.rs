use multifuse_core::counts::CountTable;
use multifuse_core::similarity::total_variation_layer;
use multifuse_core::topics::{fit_lda, GibbsSampler, LdaConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn disjoint_corpus(words: usize, count: u64) -> CountTable {
    let mut triples = Vec::new();
    for w in 0..words {
        triples.push(("d0".to_string(), format!("a{w}"), count));
        triples.push(("d1".to_string(), format!("b{w}"), count));
    }
    CountTable::from_triples(&triples).unwrap()
}

fn config(k: usize, alpha: f64, beta: f64, sweeps: usize, burn_in: usize, seed: u64) -> LdaConfig {
    LdaConfig { k_topics: k, alpha, beta, sweeps, burn_in, seed }
}

/// Unnormalized log collapsed posterior of a full topic assignment.
fn log_posterior(docs: &[Vec<usize>], z: &[Vec<usize>], k: usize, v: usize, alpha: f64, beta: f64) -> f64 {
    let lg = libm::lgamma;
    let mut ndk = vec![vec![0usize; k]; docs.len()];
    let mut nkw = vec![vec![0usize; v]; k];
    let mut nk = vec![0usize; k];
    for (d, doc) in docs.iter().enumerate() {
        for (i, &w) in doc.iter().enumerate() {
            ndk[d][z[d][i]] += 1;
            nkw[z[d][i]][w] += 1;
            nk[z[d][i]] += 1;
        }
    }
    let mut lp = 0.0;
    for row in &ndk {
        lp += row.iter().map(|&c| lg(c as f64 + alpha)).sum::<f64>();
    }
    for t in 0..k {
        lp += nkw[t].iter().map(|&c| lg(c as f64 + beta)).sum::<f64>();
        lp -= lg(nk[t] as f64 + v as f64 * beta);
    }
    lp
}

struct Exact {
    overlap: f64,
    separated_mass: f64,
}

/// Enumerates every assignment of two topics to the tokens of `docs`.
fn enumerate(docs: &[Vec<usize>], v: usize, alpha: f64, beta: f64) -> Exact {
    let n: usize = docs.iter().map(Vec::len).sum();
    let mut logs = Vec::new();
    let mut overlaps = Vec::new();
    let mut separated = Vec::new();
    for mask in 0u32..(1 << n) {
        let mut bit = 0;
        let z: Vec<Vec<usize>> = docs
            .iter()
            .map(|doc| {
                doc.iter()
                    .map(|_| {
                        let t = ((mask >> bit) & 1) as usize;
                        bit += 1;
                        t
                    })
                    .collect()
            })
            .collect();
        logs.push(log_posterior(docs, &z, 2, v, alpha, beta));
        let theta: Vec<Vec<f64>> = z
            .iter()
            .map(|zs| {
                let ones = zs.iter().filter(|&&t| t == 1).count() as f64;
                let nd = zs.len() as f64;
                vec![(nd - ones + alpha) / (nd + 2.0 * alpha), (ones + alpha) / (nd + 2.0 * alpha)]
            })
            .collect();
        overlaps.push(theta[0][0] * theta[1][0] + theta[0][1] * theta[1][1]);
        let pure = |zs: &Vec<usize>| zs.iter().all(|&t| t == zs[0]);
        separated.push(pure(&z[0]) && pure(&z[1]) && z[0][0] != z[1][0]);
    }
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    Exact {
        overlap: weights.iter().zip(&overlaps).map(|(w, o)| w * o).sum::<f64>() / total,
        separated_mass: weights.iter().zip(&separated).filter(|(_, &s)| s).map(|(w, _)| w).sum::<f64>() / total,
    }
}

#[test]
fn separated_solution_dominates_exact_posterior() {
    // Three distinct words per document, one token each.
    let docs = vec![vec![0, 1, 2], vec![3, 4, 5]];
    let exact = enumerate(&docs, 6, 0.1, 0.1);
    assert!(exact.separated_mass > 0.5, "separated mass {}", exact.separated_mass);
    // Repeated tokens sharpen the posterior further.
    let docs = vec![vec![0, 0, 1, 1, 2], vec![3, 3, 4, 4, 5]];
    let sharper = enumerate(&docs, 6, 0.1, 0.1);
    assert!(sharper.separated_mass > exact.separated_mass);
}

#[test]
fn sampler_matches_exhaustive_posterior() {
    let t = CountTable::from_triples(&[
        ("d0", "w0", 2),
        ("d0", "w1", 1),
        ("d0", "w2", 1),
        ("d1", "w2", 1),
        ("d1", "w3", 2),
        ("d1", "w4", 1),
    ])
    .unwrap();
    // Token order matches the sampler's expansion of the sorted count rows.
    let docs = vec![vec![0, 0, 1, 2], vec![2, 3, 3, 4]];
    let (alpha, beta) = (0.5, 0.3);
    let exact = enumerate(&docs, 5, alpha, beta);

    let cfg = config(2, alpha, beta, 2, 1, 11);
    let mut s = GibbsSampler::new(&t, &cfg).unwrap();
    for _ in 0..200 {
        s.sweep();
    }
    let sweeps = 200_000;
    let mut acc = 0.0;
    for _ in 0..sweeps {
        s.sweep();
        let (a, b) = (s.theta(0), s.theta(1));
        acc += a[0] * b[0] + a[1] * b[1];
    }
    let estimate = acc / sweeps as f64;
    assert!((estimate - exact.overlap).abs() < 0.005, "gibbs {estimate} vs exact {}", exact.overlap);
}

#[test]
fn disjoint_vocabularies_separate() {
    // Each word occurs three times; with single occurrences the chain
    // switches labels often enough to blur the averaged estimate.
    let t = disjoint_corpus(20, 3);
    let mut good = 0;
    for seed in 0..10 {
        let th = fit_lda(&t, &config(2, 0.1, 0.1, 500, 100, seed)).unwrap().to_dense();
        let argmax = |r: usize| if th[(r, 0)] >= th[(r, 1)] { 0 } else { 1 };
        let peak = |r: usize| th[(r, 0)].max(th[(r, 1)]);
        if argmax(0) != argmax(1) && peak(0) >= 0.9 && peak(1) >= 0.9 {
            good += 1;
        }
    }
    assert!(good >= 9, "{good}/10 seeds separated");
}

fn random_corpus(docs: usize, terms: usize, seed: u64) -> CountTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples = Vec::new();
    for d in 0..docs {
        for _ in 0..rng.random_range(1..15) {
            triples.push((format!("d{d}"), format!("t{}", rng.random_range(0..terms)), rng.random_range(1..4u64)));
        }
    }
    CountTable::from_triples(&triples).unwrap()
}

#[test]
fn rows_are_stochastic() {
    for seed in 0..5 {
        let t = random_corpus(30, 40, seed);
        for k in [1, 2, 5, 9] {
            let mut cfg = LdaConfig::new(k);
            cfg.sweeps = 60;
            cfg.burn_in = 20;
            cfg.seed = seed;
            let th = fit_lda(&t, &cfg).unwrap();
            for d in 0..th.n_rows() {
                let sum: f64 = th.row(d).iter().map(|&(_, x)| x).sum();
                assert!((sum - 1.0).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn single_topic_is_exact_on_random_corpora() {
    let t = random_corpus(25, 30, 3);
    let mut cfg = LdaConfig::new(1);
    cfg.sweeps = 10;
    cfg.burn_in = 3;
    let th = fit_lda(&t, &cfg).unwrap();
    for d in 0..th.n_rows() {
        assert_eq!(th.row(d), &[(0, 1.0)]);
    }
}

#[test]
fn content_layer_ignores_topic_labels() {
    let t = random_corpus(20, 25, 7);
    let mut cfg = LdaConfig::new(4);
    cfg.sweeps = 40;
    cfg.burn_in = 10;
    let th = fit_lda(&t, &cfg).unwrap();
    let base = total_variation_layer(&th);
    for perm in [[1, 0, 2, 3], [3, 2, 1, 0], [2, 3, 0, 1]] {
        let permuted = total_variation_layer(&th.permute_columns(&perm).unwrap());
        assert_eq!(base.values().as_slice(), permuted.values().as_slice());
    }
}

#[test]
fn seeds_agree_on_label_invariant_statistics() {
    let t = disjoint_corpus(10, 3);
    let layers: Vec<_> = (0..3)
        .map(|seed| total_variation_layer(&fit_lda(&t, &config(2, 0.1, 0.1, 300, 100, seed)).unwrap()))
        .collect();
    for l in &layers[1..] {
        assert!(l.values().max_abs_diff(layers[0].values()) < 0.02);
    }
}
