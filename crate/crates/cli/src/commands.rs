//! The six pipeline commands. Each reads finished results from the output
//! directory and writes its own outputs through a [`Stage`].

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use multifuse_core::assoc::{
    adjusted_rand, contingency, cramers_v, distance_correlation, embed_rows, partial_distance_correlation,
};
use multifuse_core::cluster::{graph_from_similarity, louvain_run, LouvainRun};
use multifuse_core::counts::{filter_vocabulary, CountTable};
use multifuse_core::fusion::{
    boyack_alpha, convex_combination, fixed_weight_alpha, glanzel_combination, snf_run, SnfConfig,
};
use multifuse_core::model::zero_diagonal;
use multifuse_core::similarity::{jaccard_layer, relative_frequencies, total_variation_layer};
use multifuse_core::synth::{complementary_spec, planted_multiplex};
use multifuse_core::topics::fit_lda;
use multifuse_core::{DistributionMatrix, Matrix, MultiplexBundle, Partition, SimilarityMatrix};
use rayon::prelude::*;

use crate::config::{BaselineSection, LayerConfig, Recipe, RunConfig};
use crate::ingest::{read_citation_edges, read_count_table, read_distribution_table, ReadOptions};
use crate::io::{read_matrix, read_partition, write_distribution, write_matrix, write_partition};
use crate::report::{square, Cell, Table};
use crate::staging::Stage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Build,
    Fuse,
    Cluster,
    Compare,
    SynthBench,
    Export,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Build => "build",
            Command::Fuse => "fuse",
            Command::Cluster => "cluster",
            Command::Compare => "compare",
            Command::SynthBench => "synth-bench",
            Command::Export => "export",
        }
    }
}

/// Runs `cmd` through a staging directory. On failure the staged outputs
/// are quarantined and the error returned.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating output directory {}", cfg.output_dir.display()))?;
    let mut stage = Stage::new(&cfg.output_dir, cmd.name())?;
    let result = match cmd {
        Command::Build => build(cfg, &mut stage),
        Command::Fuse => fuse(cfg, &mut stage),
        Command::Cluster => cluster(cfg, &mut stage),
        Command::Compare => compare(cfg, &mut stage),
        Command::SynthBench => synth_bench(cfg, &mut stage),
        Command::Export => export(cfg, &mut stage),
    };
    match result {
        Ok(()) => stage.commit(),
        Err(e) => {
            stage.log(format!("error: {e:#}"));
            let q = stage.quarantine(&e)?;
            Err(e.context(format!("{} failed; partial outputs in {}", cmd.name(), q.display())))
        }
    }
}

fn write_table(stage: &Stage, stem: &str, t: &Table) -> Result<()> {
    stage.write(format!("reports/{stem}.csv"), t.to_csv())?;
    stage.write(format!("reports/{stem}.txt"), t.to_display())?;
    print!("{}", t.to_display());
    Ok(())
}

// ---------------------------------------------------------------- build

struct BuiltLayer {
    matrices: Vec<(String, SimilarityMatrix)>,
    thetas: Vec<(String, DistributionMatrix)>,
    dropped: Vec<String>,
    notes: Vec<String>,
}

fn read_options(l: &LayerConfig) -> ReadOptions {
    ReadOptions { drop_empty: l.drop_empty, ..ReadOptions::default() }.tsv(l.tsv)
}

/// Filters the vocabulary and handles rows left without any term.
fn prepared_counts(l: &LayerConfig, notes: &mut Vec<String>, dropped: &mut Vec<String>) -> Result<CountTable> {
    let raw = read_count_table(&l.path, &read_options(l))?;
    let before = raw.n_terms();
    let f = filter_vocabulary(&raw, l.min_docs, l.max_doc_fraction)?;
    notes.push(format!(
        "vocabulary {before} -> {} terms (min_docs = {}, max_doc_fraction = {})",
        before - f.removed_terms.len(),
        l.min_docs,
        l.max_doc_fraction
    ));
    let empty = f.table.empty_rows();
    if empty.is_empty() {
        return Ok(f.table);
    }
    if !l.drop_empty {
        return Err(multifuse_core::Error::EmptyArticle(empty)).with_context(|| format!("{}", l.path.display()));
    }
    notes.push(format!("dropped {} articles without terms: {}", empty.len(), empty.join(", ")));
    dropped.extend(empty.iter().cloned());
    Ok(f.table.without_rows(&empty))
}

fn build_layer(cfg: &RunConfig, l: &LayerConfig) -> Result<BuiltLayer> {
    let mut notes = Vec::new();
    let mut dropped = Vec::new();
    let mut thetas = Vec::new();
    let matrices = match l.recipe {
        Recipe::Citation => {
            let c = read_citation_edges(&l.path, &read_options(l))?;
            notes.push(format!("{} articles, {} references", c.incidence.n_articles(), c.incidence.n_features()));
            if !c.dropped.is_empty() {
                notes.push(format!("dropped {} articles without references: {}", c.dropped.len(), c.dropped.join(", ")));
            }
            dropped = c.dropped;
            vec![(l.name.clone(), jaccard_layer(&c.incidence))]
        }
        Recipe::Words => {
            let t = prepared_counts(l, &mut notes, &mut dropped)?;
            vec![(l.name.clone(), total_variation_layer(&relative_frequencies(&t)?))]
        }
        Recipe::Topics => {
            let t = prepared_counts(l, &mut notes, &mut dropped)?;
            let fits: Vec<Result<DistributionMatrix>> =
                l.k.par_iter().map(|&k| fit_lda(&t, &cfg.lda.for_k(k)).with_context(|| format!("lda k = {k}"))).collect();
            let mut out = Vec::new();
            for ((name, &k), theta) in l.outputs().into_iter().zip(&l.k).zip(fits) {
                let theta = theta?;
                let c = cfg.lda.for_k(k);
                notes.push(format!(
                    "{name}: lda k = {k}, alpha = {}, beta = {}, sweeps = {}, burn_in = {}, seed = {}",
                    c.alpha, c.beta, c.sweeps, c.burn_in, c.seed
                ));
                out.push((name.clone(), total_variation_layer(&theta)));
                thetas.push((name, theta));
            }
            out
        }
        Recipe::Distribution => {
            let d = read_distribution_table(&l.path, &read_options(l))?;
            for (id, sum) in &d.renormalized {
                notes.push(format!("row `{id}` summed to {sum}; renormalized"));
            }
            vec![(l.name.clone(), total_variation_layer(&d.matrix))]
        }
        Recipe::Precomputed => vec![(l.name.clone(), read_matrix(&l.path)?)],
    };
    Ok(BuiltLayer { matrices, thetas, dropped, notes })
}

/// Restricts `m` to `ids`, in that order.
fn select(m: &SimilarityMatrix, ids: &[String]) -> Result<SimilarityMatrix> {
    let pos: BTreeMap<&str, usize> = m.node_ids().iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let idx: Vec<usize> = ids
        .iter()
        .map(|id| pos.get(id.as_str()).copied().ok_or_else(|| anyhow!("article `{id}` missing")))
        .collect::<Result<_>>()?;
    let v = m.values();
    Ok(SimilarityMatrix::new(Matrix::from_fn(idx.len(), idx.len(), |i, j| v[(idx[i], idx[j])]), ids.to_vec())?)
}

fn build(cfg: &RunConfig, stage: &mut Stage) -> Result<()> {
    if cfg.layers.is_empty() {
        bail!("config defines no layers");
    }
    let built: Vec<Result<BuiltLayer>> = cfg
        .layers
        .par_iter()
        .map(|l| build_layer(cfg, l).with_context(|| format!("layer `{}`", l.name)))
        .collect();
    let built: Vec<BuiltLayer> = built.into_iter().collect::<Result<_>>()?;
    let dropped: BTreeSet<String> = built.iter().flat_map(|b| b.dropped.iter().cloned()).collect();
    let reference: Vec<String> = built[0].matrices[0]
        .1
        .node_ids()
        .iter()
        .filter(|id| !dropped.contains(*id))
        .cloned()
        .collect();
    if !dropped.is_empty() {
        stage.log(format!("{} articles dropped from every layer to keep them aligned", dropped.len()));
    }
    let wanted: BTreeSet<&String> = reference.iter().collect();
    for (l, b) in cfg.layers.iter().zip(&built) {
        stage.log(format!("layer {} ({:?}): {}", l.name, l.recipe, l.path.display()));
        for n in &b.notes {
            stage.log(format!("  {n}"));
        }
        for (name, m) in &b.matrices {
            let have: BTreeSet<&String> = m.node_ids().iter().filter(|id| !dropped.contains(*id)).collect();
            if have != wanted {
                let missing: Vec<&&String> = wanted.difference(&have).take(5).collect();
                let extra: Vec<&&String> = have.difference(&wanted).take(5).collect();
                bail!(
                    "layer `{name}` is not aligned with `{}`: missing {missing:?}, extra {extra:?}",
                    built[0].matrices[0].0
                );
            }
            let aligned = select(m, &reference)?;
            stage.log(format!("  {name}: n = {}, density = {}", aligned.n(), aligned.density()));
            write_matrix(&stage.path(format!("layers/{name}.csv"))?, &aligned)?;
        }
        for (name, theta) in &b.thetas {
            write_distribution(&stage.path(format!("layers/{name}.theta.csv"))?, theta)?;
        }
    }
    Ok(())
}

// ----------------------------------------------------------------- fuse

struct Fused {
    matrices: Vec<(String, SimilarityMatrix)>,
    log: Vec<String>,
}

fn baselines(
    prefix: &str,
    s1: &SimilarityMatrix,
    s2: &SimilarityMatrix,
    b: &BaselineSection,
    log: &mut Vec<String>,
) -> Result<Vec<(String, SimilarityMatrix)>> {
    let mut out = Vec::new();
    let (t1, t2) = (s1.total(), s2.total());
    log.push(format!("  T1 = {t1}, T2 = {t2}"));
    if b.boyack {
        let alpha = boyack_alpha(s1, s2)?;
        log.push(format!("  boyack alpha = {alpha}"));
        out.push((format!("{prefix}_boyack"), convex_combination(s1, s2, alpha)?));
    }
    for (i, &low) in b.fixed_weights.iter().enumerate() {
        let alpha = fixed_weight_alpha(s1, s2, low);
        log.push(format!("  bk{} alpha = {alpha} (low weight {low})", i + 1));
        out.push((format!("{prefix}_bk{}", i + 1), convex_combination(s1, s2, alpha)?));
    }
    if b.glanzel {
        log.push(format!("  glanzel w = {}", b.glanzel_weight));
        out.push((format!("{prefix}_glanzel"), glanzel_combination(s1, s2, b.glanzel_weight)?));
    }
    Ok(out)
}

fn fuse_group(cfg: &RunConfig, name: &str, layers: &[String]) -> Result<Fused> {
    let mats: Vec<SimilarityMatrix> = layers
        .iter()
        .map(|l| read_matrix(&cfg.layers_dir().join(format!("{l}.csv"))))
        .collect::<Result<_>>()?;
    let bundle = MultiplexBundle::new(mats)?;
    let snf_cfg = cfg.snf.to_config();
    let run = snf_run(&bundle, &snf_cfg)?;
    let mut log = vec![format!(
        "fusion {name}: layers [{}], k_neighbors = {}, iterations = {}",
        layers.join(", "),
        snf_cfg.k_neighbors,
        snf_cfg.iterations
    )];
    for (t, d) in run.deltas.iter().enumerate() {
        log.push(format!("  iteration {}: max change {d}", t + 1));
    }
    for (l, iso) in layers.iter().zip(&run.isolated) {
        if !iso.is_empty() {
            let ids: Vec<&str> = iso.iter().map(|&i| bundle.node_ids()[i].as_str()).collect();
            log.push(format!("  isolated in {l}: {}", ids.join(", ")));
        }
    }
    let mut matrices = vec![(format!("{name}_snf"), run.fused)];
    if let [s1, s2] = bundle.layers() {
        matrices.extend(baselines(name, s1, s2, &cfg.baselines, &mut log)?);
    }
    Ok(Fused { matrices, log })
}

fn fuse(cfg: &RunConfig, stage: &mut Stage) -> Result<()> {
    let groups = cfg.fusion_groups();
    if groups.is_empty() {
        bail!("nothing to fuse: at least two layers are required");
    }
    let results: Vec<Result<Fused>> = groups
        .par_iter()
        .map(|g| fuse_group(cfg, &g.name, &g.layers).with_context(|| format!("fusion `{}`", g.name)))
        .collect();
    for r in results {
        let f = r?;
        for line in f.log {
            stage.log(line);
        }
        for (name, m) in &f.matrices {
            write_matrix(&stage.path(format!("fused/{name}.csv"))?, m)?;
        }
    }
    Ok(())
}

// -------------------------------------------------------------- cluster

/// Best of the Louvain runs over `seeds`; ties keep the earliest seed.
fn best_louvain(s: &SimilarityMatrix, seeds: &[u64], resolution: f64) -> Result<(u64, LouvainRun, f64)> {
    let g = graph_from_similarity(&zero_diagonal(s))?;
    let runs: Vec<Result<LouvainRun>> = seeds.par_iter().map(|&seed| Ok(louvain_run(&g, seed, resolution)?)).collect();
    let mut best: Option<(u64, LouvainRun, f64)> = None;
    for (&seed, run) in seeds.iter().zip(runs) {
        let run = run?;
        let q = *run.phase_modularity.last().unwrap_or(&0.0);
        if best.as_ref().is_none_or(|b| q > b.2) {
            best = Some((seed, run, q));
        }
    }
    best.ok_or_else(|| anyhow!("no clustering seeds"))
}

fn existing_matrices(cfg: &RunConfig, configured: Option<&Vec<String>>, stage: &mut Stage) -> Vec<String> {
    if let Some(names) = configured {
        return names.clone();
    }
    let mut names = cfg.layer_names();
    names.extend(cfg.all_fused_names());
    names
        .into_iter()
        .filter(|n| {
            let ok = cfg.matrix_path(n).exists();
            if !ok {
                stage.log(format!("skipping {n}: no matrix on disk"));
            }
            ok
        })
        .collect()
}

fn cluster(cfg: &RunConfig, stage: &mut Stage) -> Result<()> {
    let names = existing_matrices(cfg, cfg.cluster.matrices.as_ref(), stage);
    if names.is_empty() {
        bail!("no matrices to cluster");
    }
    let seeds = &cfg.cluster.seeds;
    let results: Vec<Result<(u64, LouvainRun, f64)>> = names
        .par_iter()
        .map(|n| {
            let s = read_matrix(&cfg.matrix_path(n))?;
            best_louvain(&s, seeds, cfg.cluster.resolution)
        })
        .collect();
    let mut table = Table::new("Clusters and modularity", &["matrix", "clusters", "modularity", "seed", "error"]);
    let mut failures = Vec::new();
    for (name, r) in names.iter().zip(results) {
        match r {
            Ok((seed, run, q)) => {
                let phases: Vec<String> = run.phase_modularity.iter().map(f64::to_string).collect();
                stage.log(format!("{name}: seed {seed}, phase modularity [{}]", phases.join(", ")));
                write_partition(&stage.path(format!("partitions/{name}.csv"))?, &run.partition)?;
                table.push(vec![name.as_str().into(), run.partition.num_clusters().into(), q.into(), seed.into(), Cell::Empty]);
            }
            Err(e) => {
                stage.log(format!("{name}: {e:#}"));
                table.push(vec![name.as_str().into(), Cell::Empty, Cell::Empty, Cell::Empty, format!("{e:#}").into()]);
                failures.push(name.clone());
            }
        }
    }
    write_table(stage, "clusters", &table)?;
    if !failures.is_empty() {
        bail!("clustering failed for {}", failures.join(", "));
    }
    Ok(())
}

// -------------------------------------------------------------- compare

fn compare(cfg: &RunConfig, stage: &mut Stage) -> Result<()> {
    let names = existing_matrices(cfg, cfg.compare.matrices.as_ref(), stage);
    let mut display = String::new();

    if !names.is_empty() {
        let mats: Vec<SimilarityMatrix> =
            names.iter().map(|n| read_matrix(&cfg.matrix_path(n))).collect::<Result<_>>()?;
        for m in &mats[1..] {
            multifuse_core::model::ensure_aligned(mats[0].node_ids(), m.node_ids())?;
        }
        let emb: Vec<_> = mats.par_iter().map(embed_rows).collect();
        let pairs: Vec<(usize, usize)> = (0..names.len()).flat_map(|i| (i..names.len()).map(move |j| (i, j))).collect();
        let values: Vec<Result<(f64, f64)>> = pairs
            .par_iter()
            .map(|&(i, j)| distance_correlation(&emb[i], &emb[j]).map(|d| (d.dcor, d.dcor_sq)).map_err(Into::into))
            .collect();
        let mut dc = BTreeMap::new();
        for (&(i, j), v) in pairs.iter().zip(values) {
            let v = v?;
            dc.insert((i, j), v);
            dc.insert((j, i), v);
        }
        let mut long = Table::new("", &["a", "b", "dcor", "dcor_sq"]);
        for i in 0..names.len() {
            for j in 0..names.len() {
                let (d, d2) = dc[&(i, j)];
                long.push(vec![names[i].as_str().into(), names[j].as_str().into(), d.into(), d2.into()]);
            }
        }
        stage.write("reports/dcor.csv", long.to_csv())?;
        display += &square("Distance correlation", &names, |i, j| Some(dc[&(i, j)].0)).to_display();
        display.push('\n');

        let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut partial = Table::new("Partial distance correlation", &["fused", "layer", "given", "pdcor", "sqrt_pdcor"]);
        for g in cfg.fusion_groups() {
            let fused = format!("{}_snf", g.name);
            let (Some(&f), [a, b]) = (index.get(fused.as_str()), g.layers.as_slice()) else { continue };
            let (Some(&ia), Some(&ib)) = (index.get(a.as_str()), index.get(b.as_str())) else { continue };
            for (l, z) in [(ia, ib), (ib, ia)] {
                let p = partial_distance_correlation(&emb[f], &emb[l], &emb[z])?;
                partial.push(vec![
                    fused.as_str().into(),
                    names[l].as_str().into(),
                    names[z].as_str().into(),
                    p.pdcor.into(),
                    p.sqrt_positive.into(),
                ]);
            }
        }
        stage.write("reports/pdcor.csv", partial.to_csv())?;
        display += &partial.to_display();
        display.push('\n');
    }

    let parts: Vec<String> = match &cfg.compare.partitions {
        Some(p) => p.clone(),
        None => {
            let mut all = cfg.layer_names();
            all.extend(cfg.all_fused_names());
            all.into_iter().filter(|n| cfg.partitions_dir().join(format!("{n}.csv")).exists()).collect()
        }
    };
    if !parts.is_empty() {
        let ps: Vec<Partition> = parts
            .iter()
            .map(|n| read_partition(&cfg.partitions_dir().join(format!("{n}.csv"))))
            .collect::<Result<_>>()?;
        let mut v = BTreeMap::new();
        let mut long = Table::new("", &["a", "b", "cramers_v"]);
        for i in 0..ps.len() {
            for j in 0..ps.len() {
                let x = cramers_v(&ps[i], &ps[j])?;
                v.insert((i, j), x);
                long.push(vec![parts[i].as_str().into(), parts[j].as_str().into(), x.into()]);
            }
        }
        stage.write("reports/cramers_v.csv", long.to_csv())?;
        display += &square("Cramer's V", &parts, |i, j| v.get(&(i, j)).copied()).to_display();
    }
    if names.is_empty() && parts.is_empty() {
        bail!("nothing to compare: no matrices or partitions found");
    }
    stage.write("reports/compare.txt", &display)?;
    print!("{display}");
    Ok(())
}

// ---------------------------------------------------------- synth-bench

fn louvain_partition(s: &SimilarityMatrix, seed: u64) -> Result<Partition> {
    let g = graph_from_similarity(&zero_diagonal(s))?;
    Ok(louvain_run(&g, seed, 1.0)?.partition)
}

/// Every method's matrix for one synthetic bundle, in report order.
pub fn bench_matrices(
    bundle: &MultiplexBundle,
    snf_cfg: &SnfConfig,
    b: &BaselineSection,
) -> Result<Vec<(String, SimilarityMatrix)>> {
    let l = bundle.layers();
    let mut out = vec![("layer1".to_string(), l[0].clone()), ("layer2".to_string(), l[1].clone())];
    out.push(("snf".into(), snf_run(bundle, snf_cfg)?.fused));
    let mut sink = Vec::new();
    for (name, m) in baselines("", &l[0], &l[1], b, &mut sink)? {
        out.push((name.trim_start_matches('_').to_string(), m));
    }
    Ok(out)
}

struct BenchRow {
    seed: u64,
    method: String,
    ari: f64,
    clusters: usize,
}

fn synth_bench(cfg: &RunConfig, stage: &mut Stage) -> Result<()> {
    let s = &cfg.synth;
    let snf_cfg = cfg.snf.to_config();
    stage.log(format!(
        "complementary pair: n = {}, k = {}, mu_in = {}, mu_out = {}, sigma = {}, seeds = {:?}, cluster seed = {}",
        s.n, s.k, s.mu_in, s.mu_out, s.sigma, s.seeds, s.cluster_seed
    ));
    let per_seed: Vec<Result<Vec<BenchRow>>> = s
        .seeds
        .par_iter()
        .map(|&seed| {
            let planted = planted_multiplex(&complementary_spec(s.n, s.k, s.mu_in, s.mu_out, s.sigma, seed)?)?;
            let mut rows = Vec::new();
            for (method, m) in bench_matrices(&planted.bundle, &snf_cfg, &cfg.baselines)? {
                let p = louvain_partition(&m, s.cluster_seed)?;
                rows.push(BenchRow { seed, method, ari: adjusted_rand(&p, &planted.truth)?, clusters: p.num_clusters() });
            }
            Ok(rows)
        })
        .collect();
    let rows: Vec<Vec<BenchRow>> = per_seed.into_iter().collect::<Result<_>>()?;

    let mut detail = Table::new("", &["seed", "method", "ari", "clusters"]);
    let methods: Vec<String> = rows.first().map(|r| r.iter().map(|b| b.method.clone()).collect()).unwrap_or_default();
    let mut sum = vec![0.0; methods.len()];
    let mut wins = vec![0usize; methods.len()];
    let mut beats = vec![0usize; methods.len()];
    for seed_rows in &rows {
        let best = seed_rows.iter().map(|r| r.ari).fold(f64::NEG_INFINITY, f64::max);
        let single = seed_rows[0].ari.max(seed_rows[1].ari);
        for (m, r) in seed_rows.iter().enumerate() {
            detail.push(vec![r.seed.into(), r.method.as_str().into(), r.ari.into(), r.clusters.into()]);
            sum[m] += r.ari;
            wins[m] += usize::from(r.ari >= best);
            beats[m] += usize::from(r.ari >= single);
        }
    }
    stage.write("reports/synth_bench.csv", detail.to_csv())?;
    let mut summary = Table::new("Synthetic benchmark (ARI vs truth)", &["method", "mean_ari", "wins", "at_least_single_layers", "seeds"]);
    for (m, name) in methods.iter().enumerate() {
        summary.push(vec![
            name.as_str().into(),
            (sum[m] / rows.len() as f64).into(),
            wins[m].into(),
            beats[m].into(),
            rows.len().into(),
        ]);
    }
    write_table(stage, "synth_bench_summary", &summary)?;

    if s.emit {
        if let Some(&seed) = s.seeds.first() {
            let planted = planted_multiplex(&complementary_spec(s.n, s.k, s.mu_in, s.mu_out, s.sigma, seed)?)?;
            for (i, l) in planted.bundle.layers().iter().enumerate() {
                write_matrix(&stage.path(format!("synth/layer{}.csv", i + 1))?, l)?;
            }
            write_partition(&stage.path("synth/truth.csv")?, &planted.truth)?;
            stage.log(format!("emitted bundle for seed {seed} under synth/"));
        }
    }
    Ok(())
}

// --------------------------------------------------------------- export

fn export(cfg: &RunConfig, stage: &mut Stage) -> Result<()> {
    let e = &cfg.export;
    if e.matrix.is_none() && e.crosstabs.is_empty() {
        bail!("nothing to export: set export.matrix or export.crosstabs");
    }
    if let Some(name) = &e.matrix {
        let m = read_matrix(&cfg.matrix_path(name))?;
        let pname = e.partition.as_ref().unwrap_or(name);
        let p = read_partition(&cfg.partitions_dir().join(format!("{pname}.csv")))?;
        multifuse_core::model::ensure_aligned(m.node_ids(), p.node_ids())?;
        let ids = m.node_ids();
        let labels = p.labels();
        let mut edges = String::from("source\ttarget\tweight\tcluster\n");
        let (mut kept, mut below) = (0usize, 0usize);
        for i in 0..m.n() {
            for j in (i + 1)..m.n() {
                let w = m.get(i, j);
                if w <= 0.0 {
                    continue;
                }
                if w < e.threshold {
                    below += 1;
                    continue;
                }
                kept += 1;
                edges += &format!("{}\t{}\t{w}\t{}\n", ids[i], ids[j], labels[i]);
            }
        }
        stage.write(format!("export/{name}.edges.tsv"), edges)?;
        let mut nodes = String::from("id\tcluster\n");
        for (id, c) in ids.iter().zip(labels) {
            nodes += &format!("{id}\t{c}\n");
        }
        stage.write(format!("export/{name}.nodes.tsv"), nodes)?;
        stage.log(format!("{name}: {kept} edges written, {below} below threshold {} dropped", e.threshold));
    }
    for [a, b] in &e.crosstabs {
        let pa = read_partition(&cfg.partitions_dir().join(format!("{a}.csv")))?;
        let pb = read_partition(&cfg.partitions_dir().join(format!("{b}.csv")))?;
        let table = contingency(&pa, &pb)?;
        let mut t = Table::new("", &[&format!("cluster_{a}"), &format!("cluster_{b}"), "count"]);
        for (ca, row) in table.iter().enumerate() {
            for (cb, &n) in row.iter().enumerate() {
                if n > 0 {
                    t.push(vec![ca.into(), cb.into(), n.into()]);
                }
            }
        }
        stage.write(format!("export/{a}__{b}.crosstab.csv"), t.to_csv())?;
        stage.log(format!("crosstab {a} x {b}: {} nonzero cells", t.rows.len()));
    }
    Ok(())
}

/// Resolves a possibly relative path against the current directory.
pub fn absolute(p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        std::env::current_dir().map(|d| d.join(p)).unwrap_or_else(|_| p.to_path_buf())
    }
}
