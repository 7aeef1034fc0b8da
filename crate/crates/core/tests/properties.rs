use multifuse_core::assoc::{
    adjusted_rand, cramers_v, matrix_distance_correlation, matrix_partial_distance_correlation,
};
use multifuse_core::cluster::{graph_from_similarity, louvain, modularity, WeightedGraph};
use multifuse_core::counts::{filter_vocabulary, CountTable};
use multifuse_core::fusion::{convex_combination, glanzel_combination, knn_kernel};
use multifuse_core::model::{symmetrize, validate_similarity, zero_diagonal};
use multifuse_core::similarity::{jaccard_layer, total_variation_layer};
use multifuse_core::synth::{node_ids, planted_multiplex, LayerSpec, PlantedSpec};
use multifuse_core::{BipartiteIncidence, DistributionMatrix, Matrix, Partition, SimilarityMatrix};
use proptest::prelude::*;

fn square(n: std::ops::Range<usize>) -> impl Strategy<Value = Matrix> {
    n.prop_flat_map(|n| prop::collection::vec(0.0f64..1.0, n * n).prop_map(move |v| Matrix::from_vec(n, n, v)))
}

fn similarity(n: std::ops::Range<usize>) -> impl Strategy<Value = SimilarityMatrix> {
    square(n).prop_map(|m| {
        let ids = node_ids(m.rows());
        symmetrize(&m, ids).unwrap()
    })
}

fn ids(n: usize) -> Vec<String> {
    node_ids(n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetrize_is_idempotent_and_valid(m in square(1..12)) {
        let once = symmetrize(&m, ids(m.rows())).unwrap();
        let twice = symmetrize(once.values(), ids(m.rows())).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert!(validate_similarity(once.clone()).is_ok());
        let z = zero_diagonal(&once);
        prop_assert!(validate_similarity(z).is_ok());
    }

    #[test]
    fn filter_is_monotone_in_min_docs(
        triples in prop::collection::vec((0usize..8, 0usize..10, 1u64..4), 1..60),
        lo in 0usize..5, extra in 0usize..4,
    ) {
        let t: Vec<(String, String, u64)> =
            triples.iter().map(|&(d, w, c)| (format!("d{d}"), format!("w{w}"), c)).collect();
        let table = CountTable::from_triples(&t).unwrap();
        let kept = |min: usize| filter_vocabulary(&table, min, 1.0).map(|f| f.table.term_ids().to_vec()).unwrap_or_default();
        let low = kept(lo);
        for term in kept(lo + extra) {
            prop_assert!(low.contains(&term));
        }
    }

    #[test]
    fn layers_are_valid_and_permutation_equivariant(
        sets in prop::collection::vec(prop::collection::btree_set(0usize..15, 1..6), 2..12),
        seed in any::<u64>(),
    ) {
        let n = sets.len();
        let pairs: Vec<(String, String)> = sets
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |f| (format!("a{i}"), format!("r{f}"))))
            .collect();
        let b = BipartiteIncidence::from_pairs(&pairs).unwrap();
        let j = jaccard_layer(&b);
        prop_assert!(validate_similarity(j.clone()).is_ok());
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by_key(|&i| (i as u64).wrapping_mul(seed | 1).rotate_left(7));
        let permuted_ids: Vec<String> = perm.iter().map(|&p| b.articles()[p].clone()).collect();
        let jb = jaccard_layer(&b.select(&permuted_ids).unwrap());
        prop_assert_eq!(jb, j.permuted(&perm));

        let dense = Matrix::from_fn(n, 15, |i, f| if sets[i].contains(&f) { 1.0 / sets[i].len() as f64 } else { 0.0 });
        let cols: Vec<String> = (0..15).map(|f| format!("f{f}")).collect();
        let d = DistributionMatrix::from_dense(ids(n), cols.clone(), &dense).unwrap();
        let v = total_variation_layer(&d);
        prop_assert!(validate_similarity(v.clone()).is_ok());
        prop_assert!((0..n).all(|i| v.get(i, i) == 1.0));
        let pd = DistributionMatrix::from_dense(
            perm.iter().map(|&p| format!("n{p}")).collect(),
            cols,
            &dense.permuted_rows(&perm),
        ).unwrap();
        let (lhs, rhs) = (total_variation_layer(&pd), v.permuted(&perm));
        prop_assert_eq!(lhs.values(), rhs.values());
    }

    #[test]
    fn knn_support_is_exactly_k(s in similarity(3..15), k in 1usize..14) {
        let k = k.min(s.n() - 1);
        prop_assume!((0..s.n()).all(|i| (0..s.n()).any(|j| j != i && s.get(i, j) > 0.0)));
        let kernel = knn_kernel(&s, k).unwrap();
        for i in 0..s.n() {
            prop_assert_eq!(kernel.row(i).len(), k);
            prop_assert!((kernel.row(i).iter().map(|e| e.1).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hybrids_keep_range_and_commute(pair in (2usize..10).prop_flat_map(|n| (similarity(n..n + 1), similarity(n..n + 1))), alpha in 0.0f64..=1.0) {
        let (a, b) = pair;
        let c = convex_combination(&a, &b, alpha).unwrap();
        prop_assert!(validate_similarity(c.clone()).is_ok());
        prop_assert!(c.values().as_slice().iter().all(|&v| (0.0..=1.0).contains(&v)));
        let g1 = glanzel_combination(&a, &b, 0.5).unwrap();
        let g2 = glanzel_combination(&b, &a, 0.5).unwrap();
        prop_assert!(g1.values().max_abs_diff(g2.values()) < 1e-12);
    }

    #[test]
    fn association_ranges_and_symmetries(triple in (4usize..12).prop_flat_map(|n| (similarity(n..n + 1), similarity(n..n + 1), similarity(n..n + 1)))) {
        let (a, b, z) = triple;
        let ab = matrix_distance_correlation(&a, &b).unwrap();
        let ba = matrix_distance_correlation(&b, &a).unwrap();
        prop_assert!((ab.dcor - ba.dcor).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab.dcor) && (0.0..=1.0).contains(&ab.dcor_sq));
        prop_assert!((ab.dcor * ab.dcor - ab.dcor_sq).abs() < 1e-12);
        let perm: Vec<usize> = (0..a.n()).rev().collect();
        let pab = matrix_distance_correlation(&a.permuted(&perm), &b.permuted(&perm)).unwrap();
        prop_assert!((pab.dcor - ab.dcor).abs() < 1e-10);

        let p = matrix_partial_distance_correlation(&a, &b, &z).unwrap();
        let q = matrix_partial_distance_correlation(&b, &a, &z).unwrap();
        prop_assert!((-1.0..=1.0).contains(&p.pdcor));
        prop_assert!((p.pdcor - q.pdcor).abs() < 1e-12);
        prop_assert!(matrix_partial_distance_correlation(&a, &b, &b).unwrap().pdcor.abs() < 1e-10);
    }

    #[test]
    fn cramers_v_is_label_invariant(labels in prop::collection::vec((0usize..4, 0usize..5), 2..40), shift in 1usize..50) {
        let a: Vec<usize> = labels.iter().map(|l| l.0).collect();
        let b: Vec<usize> = labels.iter().map(|l| l.1).collect();
        let relabeled: Vec<usize> = b.iter().map(|&x| (x * 7 + shift) % 101).collect();
        let v1 = cramers_v(&Partition::with_index_ids(a.clone()), &Partition::with_index_ids(b)).unwrap();
        let v2 = cramers_v(&Partition::with_index_ids(a), &Partition::with_index_ids(relabeled)).unwrap();
        prop_assert_eq!(v1, v2);
    }

    #[test]
    fn modularity_invariances(s in similarity(3..15), labels in prop::collection::vec(0usize..4, 15), c in 0.01f64..100.0) {
        let n = s.n();
        let g = match graph_from_similarity(&s) { Ok(g) => g, Err(_) => return Ok(()) };
        let p = Partition::new(labels[..n].to_vec(), g.node_ids().to_vec()).unwrap();
        let relabeled = Partition::new(labels[..n].iter().map(|l| 9 - l).collect(), g.node_ids().to_vec()).unwrap();
        let q = modularity(&g, &p).unwrap();
        prop_assert!((q - modularity(&g, &relabeled).unwrap()).abs() < 1e-12);
        prop_assert!((q - modularity(&g.scaled(c), &p).unwrap()).abs() < 1e-12);
    }
}

trait PermutedRows {
    fn permuted_rows(&self, perm: &[usize]) -> Matrix;
}

impl PermutedRows for Matrix {
    fn permuted_rows(&self, perm: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows(), self.cols(), |i, j| self[(perm[i], j)])
    }
}

#[test]
fn louvain_ignores_appended_isolated_nodes() {
    for seed in 0..5u64 {
        let spec = PlantedSpec { n: 40, blocks: vec![20, 20], layers: vec![LayerSpec::new(0.6, 0.1, 0.2)], seed };
        let layer = planted_multiplex(&spec).unwrap().bundle.into_layers().remove(0);
        let g = graph_from_similarity(&layer).unwrap();
        let base = louvain(&g, seed, 1.0).unwrap();
        // interleave 5 isolated nodes
        let n = 45;
        let map: Vec<Option<usize>> = (0..n).map(|i| if i % 9 == 4 { None } else { Some(i - (i + 4) / 9) }).collect();
        let m = Matrix::from_fn(n, n, |i, j| match (map[i], map[j]) {
            (Some(a), Some(b)) if a != b => g.adjacency()[(a, b)],
            _ => 0.0,
        });
        let big = WeightedGraph::new(SimilarityMatrix::with_index_ids(m).unwrap()).unwrap();
        let p = louvain(&big, seed, 1.0).unwrap();
        let restricted: Vec<usize> = (0..n).filter(|&i| map[i].is_some()).map(|i| p.labels()[i]).collect();
        assert_eq!(Partition::with_index_ids(restricted), Partition::with_index_ids(base.labels().to_vec()));
        let sizes = p.cluster_sizes();
        for i in (0..n).filter(|&i| map[i].is_none()) {
            assert_eq!(sizes[p.labels()[i]], 1);
        }
    }
}

#[test]
fn louvain_phases_never_lose_modularity() {
    for seed in 0..5u64 {
        let spec = PlantedSpec { n: 90, blocks: vec![30, 30, 30], layers: vec![LayerSpec::new(0.5, 0.2, 0.2)], seed };
        let layer = planted_multiplex(&spec).unwrap().bundle.into_layers().remove(0);
        let g = graph_from_similarity(&layer).unwrap();
        let run = multifuse_core::cluster::louvain_run(&g, seed, 1.0).unwrap();
        assert!(run.phase_modularity.windows(2).all(|w| w[1] > w[0]));
        assert!(*run.phase_modularity.last().unwrap() >= run.phase_modularity[0]);
    }
}

#[test]
fn planted_stochastic_block_graph_is_recovered() {
    use rand::{Rng, SeedableRng};
    let n = 200;
    let mut hits = 0;
    for seed in 0..10u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let truth: Vec<usize> = (0..n).map(|i| i / 50).collect();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let p = if truth[i] == truth[j] { 0.3 } else { 0.01 };
                if rng.random::<f64>() < p {
                    m[(i, j)] = 1.0;
                    m[(j, i)] = 1.0;
                }
            }
        }
        let g = WeightedGraph::new(SimilarityMatrix::with_index_ids(m).unwrap()).unwrap();
        let p = louvain(&g, seed, 1.0).unwrap();
        let ari = adjusted_rand(&p, &Partition::with_index_ids(truth)).unwrap();
        hits += usize::from(ari == 1.0);
    }
    assert!(hits >= 9, "recovered in {hits}/10 seeds");
}

#[test]
fn generated_layers_validate_and_noiseless_layers_are_recovered() {
    for seed in 0..5u64 {
        let spec = PlantedSpec {
            n: 60,
            blocks: vec![20, 25, 15],
            layers: vec![LayerSpec::new(0.7, 0.2, 0.0), LayerSpec::new(0.6, 0.3, 0.3)],
            seed,
        };
        let planted = planted_multiplex(&spec).unwrap();
        for layer in planted.bundle.layers() {
            assert!(validate_similarity(layer.clone()).is_ok());
        }
        let g = graph_from_similarity(&planted.bundle.layers()[0]).unwrap();
        let p = louvain(&g, seed, 1.0).unwrap();
        assert_eq!(adjusted_rand(&p, &planted.truth).unwrap(), 1.0);
    }
}

#[test]
fn single_layer_recovery_degrades_with_noise() {
    let sigmas = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7];
    let means: Vec<f64> = sigmas
        .iter()
        .map(|&sigma| {
            (0..10u64)
                .map(|seed| {
                    let spec = PlantedSpec {
                        n: 80,
                        blocks: vec![20; 4],
                        layers: vec![LayerSpec::new(0.4, 0.2, sigma)],
                        seed,
                    };
                    let planted = planted_multiplex(&spec).unwrap();
                    let g = graph_from_similarity(&planted.bundle.layers()[0]).unwrap();
                    adjusted_rand(&louvain(&g, seed, 1.0).unwrap(), &planted.truth).unwrap()
                })
                .sum::<f64>()
                / 10.0
        })
        .collect();
    let violations = means.windows(2).filter(|w| w[1] > w[0] + 1e-12).count();
    assert!(violations <= 1, "mean ARI by sigma: {means:?}");
    assert!(means[0] > means[means.len() - 1]);
}
