//! TOML run configuration.
//!
//! Relative paths are resolved against the directory holding the config
//! file. Any key can be overridden from the command line with
//! `--set section.key=value`, where `value` is a TOML literal (bare words
//! are taken as strings).

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use multifuse_core::counts::{DEFAULT_MAX_DOC_FRACTION, DEFAULT_MIN_DOCS};
use multifuse_core::fusion::{SnfConfig, DEFAULT_GLANZEL_WEIGHT, DEFAULT_ITERATIONS, DEFAULT_K_NEIGHBORS, FIXED_LOW_WEIGHTS};
use multifuse_core::synth::{DEFAULT_MU_IN, DEFAULT_MU_OUT};
use multifuse_core::topics::{LdaConfig, DEFAULT_BETA, DEFAULT_BURN_IN, DEFAULT_SWEEPS};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads; `MULTIFUSE_THREADS` takes precedence when set.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub layers: Vec<LayerConfig>,
    #[serde(default)]
    pub lda: LdaSection,
    #[serde(default)]
    pub snf: SnfSection,
    /// Layer groups to fuse. When empty, the first built layer is paired
    /// with every other one.
    #[serde(default)]
    pub fusions: Vec<FusionConfig>,
    #[serde(default)]
    pub baselines: BaselineSection,
    #[serde(default)]
    pub cluster: ClusterSection,
    #[serde(default)]
    pub compare: CompareSection,
    #[serde(default)]
    pub synth: SynthSection,
    #[serde(default)]
    pub export: ExportSection,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recipe {
    /// `article_id,reference_id` pairs → Jaccard layer.
    Citation,
    /// `article_id,term,count` triples → filtered word frequencies → total variation layer.
    Words,
    /// Word counts → LDA for every `k` → one total variation layer per `k`.
    Topics,
    /// `article_id,feature,weight` triples → total variation layer.
    Distribution,
    /// Matrix CSV with `.ids` sidecar, used as is.
    Precomputed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub name: String,
    pub recipe: Recipe,
    pub path: PathBuf,
    #[serde(default)]
    pub tsv: bool,
    #[serde(default)]
    pub drop_empty: bool,
    #[serde(default = "default_min_docs")]
    pub min_docs: usize,
    #[serde(default = "default_max_doc_fraction")]
    pub max_doc_fraction: f64,
    /// Topic counts for the `topics` recipe.
    #[serde(default)]
    pub k: Vec<usize>,
}

fn default_min_docs() -> usize {
    DEFAULT_MIN_DOCS
}

fn default_max_doc_fraction() -> f64 {
    DEFAULT_MAX_DOC_FRACTION
}

impl LayerConfig {
    /// Names of the matrices this layer produces.
    pub fn outputs(&self) -> Vec<String> {
        match self.recipe {
            Recipe::Topics => self.k.iter().map(|k| format!("{}_k{k}", self.name)).collect(),
            _ => vec![self.name.clone()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LdaSection {
    /// Document–topic prior; `50 / k` when absent.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub sweeps: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl Default for LdaSection {
    fn default() -> Self {
        Self { alpha: None, beta: DEFAULT_BETA, sweeps: DEFAULT_SWEEPS, burn_in: DEFAULT_BURN_IN, seed: 0 }
    }
}

impl LdaSection {
    pub fn for_k(&self, k: usize) -> LdaConfig {
        let mut c = LdaConfig::new(k);
        if let Some(a) = self.alpha {
            c.alpha = a;
        }
        c.beta = self.beta;
        c.sweeps = self.sweeps;
        c.burn_in = self.burn_in;
        c.seed = self.seed;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnfSection {
    pub k_neighbors: usize,
    pub iterations: usize,
}

impl Default for SnfSection {
    fn default() -> Self {
        Self { k_neighbors: DEFAULT_K_NEIGHBORS, iterations: DEFAULT_ITERATIONS }
    }
}

impl SnfSection {
    pub fn to_config(&self) -> SnfConfig {
        SnfConfig::new(self.k_neighbors, self.iterations)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionConfig {
    pub name: String,
    pub layers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineSection {
    /// Convex combination with `α = T2 / (T1 + T2)`.
    pub boyack: bool,
    /// Weight given to the layer with the larger total, one matrix each.
    pub fixed_weights: Vec<f64>,
    pub glanzel: bool,
    pub glanzel_weight: f64,
}

impl Default for BaselineSection {
    fn default() -> Self {
        Self { boyack: true, fixed_weights: FIXED_LOW_WEIGHTS.to_vec(), glanzel: true, glanzel_weight: DEFAULT_GLANZEL_WEIGHT }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterSection {
    /// One Louvain run per seed; the highest-modularity partition is kept.
    pub seeds: Vec<u64>,
    pub resolution: f64,
    /// Matrices to cluster; every layer and fused matrix when absent.
    pub matrices: Option<Vec<String>>,
}

impl Default for ClusterSection {
    fn default() -> Self {
        Self { seeds: vec![0], resolution: 1.0, matrices: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    pub matrices: Option<Vec<String>>,
    pub partitions: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub n: usize,
    pub k: usize,
    pub sigma: f64,
    pub mu_in: f64,
    pub mu_out: f64,
    pub seeds: Vec<u64>,
    pub cluster_seed: u64,
    /// Also write the first seed's layers and truth under `synth/`.
    pub emit: bool,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            n: 200,
            k: 4,
            sigma: 0.05,
            mu_in: DEFAULT_MU_IN,
            mu_out: DEFAULT_MU_OUT,
            seeds: (0..10).collect(),
            cluster_seed: 0,
            emit: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExportSection {
    /// Matrix written as an edge list.
    pub matrix: Option<String>,
    /// Partition supplying the cluster column; defaults to `matrix`.
    pub partition: Option<String>,
    /// Edges with weight below this are dropped.
    pub threshold: f64,
    /// Partition pairs cross-tabulated for alluvial plots.
    pub crosstabs: Vec<[String; 2]>,
}

impl Default for ExportSection {
    fn default() -> Self {
        Self { matrix: None, partition: None, threshold: 0.0, crosstabs: Vec::new() }
    }
}

impl RunConfig {
    /// Minimal config for commands that need no inputs.
    pub fn empty() -> Self {
        toml::from_str(&format!("schema_version = {SCHEMA_VERSION}")).expect("defaults deserialize")
    }

    /// Reads `path`, applies `overrides`, then resolves relative paths
    /// against the config file's directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut value: toml::Table = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let mut cfg: RunConfig = RunConfig::deserialize(toml::Value::Table(value))
            .with_context(|| format!("config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds from overrides alone, resolving paths against `base`.
    pub fn from_overrides(base: &Path, overrides: &[String]) -> Result<Self> {
        let mut value = toml::Table::new();
        value.insert("schema_version".into(), toml::Value::Integer(SCHEMA_VERSION.into()));
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let mut cfg = RunConfig::deserialize(toml::Value::Table(value))?;
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        self.output_dir = base.join(&self.output_dir);
        for l in &mut self.layers {
            l.path = base.join(&l.path);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version);
        }
        let mut names = std::collections::BTreeSet::new();
        for l in &self.layers {
            if l.recipe == Recipe::Topics && l.k.is_empty() {
                bail!("layer `{}`: topics recipe needs at least one k", l.name);
            }
            for out in l.outputs() {
                if !names.insert(out.clone()) {
                    bail!("duplicate layer output `{out}`");
                }
            }
        }
        for f in &self.fusions {
            if f.layers.len() < 2 {
                bail!("fusion `{}` needs at least two layers", f.name);
            }
        }
        if self.cluster.seeds.is_empty() {
            bail!("cluster.seeds is empty");
        }
        Ok(())
    }

    /// Names of all layer matrices, in config order.
    pub fn layer_names(&self) -> Vec<String> {
        self.layers.iter().flat_map(LayerConfig::outputs).collect()
    }

    /// Configured fusions, or the first layer paired with each other layer.
    pub fn fusion_groups(&self) -> Vec<FusionConfig> {
        if !self.fusions.is_empty() {
            return self.fusions.clone();
        }
        let names = self.layer_names();
        names
            .iter()
            .skip(1)
            .map(|other| FusionConfig { name: format!("{}+{other}", names[0]), layers: vec![names[0].clone(), other.clone()] })
            .collect()
    }

    /// Names of every matrix `fuse` writes, grouped by fusion.
    pub fn fused_names(&self, f: &FusionConfig) -> Vec<String> {
        let mut out = vec![format!("{}_snf", f.name)];
        if f.layers.len() == 2 {
            if self.baselines.boyack {
                out.push(format!("{}_boyack", f.name));
            }
            for i in 0..self.baselines.fixed_weights.len() {
                out.push(format!("{}_bk{}", f.name, i + 1));
            }
            if self.baselines.glanzel {
                out.push(format!("{}_glanzel", f.name));
            }
        }
        out
    }

    pub fn all_fused_names(&self) -> Vec<String> {
        self.fusion_groups().iter().flat_map(|f| self.fused_names(f)).collect()
    }

    pub fn layers_dir(&self) -> PathBuf {
        self.output_dir.join("layers")
    }

    pub fn fused_dir(&self) -> PathBuf {
        self.output_dir.join("fused")
    }

    pub fn partitions_dir(&self) -> PathBuf {
        self.output_dir.join("partitions")
    }

    /// Location of a named matrix: the layer directory first, then fused.
    pub fn matrix_path(&self, name: &str) -> PathBuf {
        let layer = self.layers_dir().join(format!("{name}.csv"));
        if layer.exists() {
            layer
        } else {
            self.fused_dir().join(format!("{name}.csv"))
        }
    }
}

/// Sets `dotted.key=value` in `table`. Numeric path segments index arrays.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| anyhow!("override `{assignment}` is not key=value"))?;
    let value = parse_value(raw.trim());
    let parts: Vec<&str> = key.trim().split('.').collect();
    let mut cur = table;
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        if last {
            cur.insert(part.to_string(), value);
            return Ok(());
        }
        let next = parts[i + 1];
        let entry = cur.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        match (entry, next.parse::<usize>()) {
            (toml::Value::Array(items), Ok(idx)) => {
                let item = items.get_mut(idx).ok_or_else(|| anyhow!("override `{key}`: index {idx} out of range"))?;
                if i + 2 == parts.len() {
                    *item = value;
                    return Ok(());
                }
                match item {
                    toml::Value::Table(t) => {
                        return apply_override(t, &format!("{}={raw}", parts[i + 2..].join(".")));
                    }
                    _ => bail!("override `{key}`: element {idx} is not a table"),
                }
            }
            (toml::Value::Table(t), _) => cur = t,
            _ => bail!("override `{key}`: `{part}` is not a table"),
        }
    }
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
