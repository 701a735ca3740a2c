//! Run descriptors: one TOML file holding everything a command needs, with command-line flags
//! overriding the top-level keys of the same name.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use xbf::bloom::KRule;
use xbf::exec::Execution;
use xbf::partition::PartitionConfig;
use xbf::sim::{ExperimentConfig, Scheme};
use xbf::topo::{TopoKind, TopoSpec, TrafficModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Partitioner {
    #[default]
    Jigsaw,
    Powergraph,
}

/// Per-link weights handed to the partitioner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WeightSource {
    /// `edgelist` for file topologies, `synthesized` for generated ones.
    #[default]
    Auto,
    /// Multicast trees rooted at every node, per the traffic model.
    Synthesized,
    /// The traffic column of the edge list.
    Edgelist,
    Betweenness,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LpsSection {
    /// Target success fractions, one table row each.
    pub p: Vec<f64>,
}

impl Default for LpsSection {
    fn default() -> Self {
        LpsSection {
            p: vec![0.95, 0.99],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunDescriptor {
    /// Drives every random choice; component-level seeds are overwritten with it.
    pub seed: u64,
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    pub jobs: usize,
    /// Left out of provenance records so that identical runs produce identical files.
    #[serde(skip_serializing)]
    pub out: PathBuf,
    pub partitioner: Partitioner,
    pub scheme: Scheme,
    pub sinks: Vec<usize>,
    pub trials: usize,
    pub weights: WeightSource,
    /// Trees per node when synthesizing link traffic.
    pub traffic_trials: usize,
    /// Precomputed partitioning JSON; skips partitioning when set.
    pub partitioning: Option<PathBuf>,
    /// Explicit tree for `headers`: source label and sink labels.
    pub source: Option<String>,
    pub to: Vec<String>,
    pub classical_m: usize,
    pub k_rule: KRule,
    pub ttl: Option<usize>,
    pub topology: Option<TopoSpec>,
    pub partition: PartitionConfig,
    pub traffic: TrafficModel,
    pub lps: LpsSection,
}

impl Default for RunDescriptor {
    fn default() -> Self {
        let exp = ExperimentConfig::default();
        RunDescriptor {
            seed: 0,
            jobs: 0,
            out: PathBuf::from("xbf-out"),
            partitioner: Partitioner::Jigsaw,
            scheme: Scheme::Xbf,
            sinks: exp.sinks,
            trials: exp.trials,
            weights: WeightSource::Auto,
            traffic_trials: 10,
            partitioning: None,
            source: None,
            to: Vec::new(),
            classical_m: exp.classical_m,
            k_rule: exp.k_rule,
            ttl: exp.ttl,
            topology: None,
            partition: PartitionConfig::default(),
            traffic: TrafficModel::default(),
            lps: LpsSection::default(),
        }
    }
}

impl RunDescriptor {
    pub fn load(path: &Path) -> Result<RunDescriptor> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading run descriptor {}", path.display()))?;
        let mut d: RunDescriptor = toml::from_str(&text)
            .with_context(|| format!("parsing run descriptor {}", path.display()))?;
        // relative paths inside the descriptor are relative to the descriptor itself
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(TopoSpec {
            kind: TopoKind::File { path: p },
            ..
        }) = d.topology.as_mut()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = d.partitioning.as_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(d)
    }

    /// Pushes the master seed into every component and checks cross-field constraints.
    pub fn finalize(mut self) -> Result<RunDescriptor> {
        if let Some(t) = self.topology.as_mut() {
            t.seed = self.seed;
            if let TopoKind::File { path } = &t.kind {
                if !path.is_file() {
                    bail!("topology file {} does not exist", path.display());
                }
            }
        }
        if let Some(p) = &self.partitioning {
            if !p.is_file() {
                bail!("partitioning file {} does not exist", p.display());
            }
        }
        self.partition.seed = self.seed;
        self.traffic.seed = self.seed;
        self.partition.validate()?;
        self.traffic.validate().map_err(anyhow::Error::msg)?;
        if self.sinks.is_empty() {
            bail!("sinks must list at least one sink count");
        }
        Ok(self)
    }

    pub fn topology(&self) -> Result<&TopoSpec> {
        self.topology.as_ref().context(
            "no topology: pass --ba, --er or --topology, or set [topology] in the descriptor",
        )
    }

    pub fn exec(&self) -> Execution {
        if self.jobs == 1 {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    pub fn weight_source(&self) -> Result<WeightSource> {
        Ok(match self.weights {
            WeightSource::Auto => match self.topology()?.kind {
                TopoKind::File { .. } => WeightSource::Edgelist,
                _ => WeightSource::Synthesized,
            },
            w => w,
        })
    }

    pub fn experiment(&self, topology: &str, scheme: Scheme) -> ExperimentConfig {
        ExperimentConfig {
            topology: topology.to_owned(),
            sinks: self.sinks.clone(),
            trials: self.trials,
            seed: self.seed,
            scheme,
            traffic: self.traffic,
            classical_m: self.classical_m,
            k_rule: self.k_rule,
            ttl: self.ttl,
            exec: self.exec(),
        }
    }
}
