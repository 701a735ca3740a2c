use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bloom::{gen_random_ids, KRule};
use crate::exec::Execution;
use crate::graph::{NetworkGraph, NodeId};
use crate::header::{build_header, compress_bits};
use crate::partition::Partitioning;
use crate::rng;
use crate::stats::Spread;
use crate::topo::TrafficModel;

use super::deliver::{deliver_classical, entry_partition, forward_xbf};
use super::{build_multicast_tree, sample_sinks, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Xbf,
    Classical,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Xbf => "xbf",
            Scheme::Classical => "classical",
        }
    }
}

/// One simulation campaign over a fixed network (and partitioning, for XBF).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Label written to every row.
    pub topology: String,
    pub sinks: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub scheme: Scheme,
    /// Sources are drawn proportionally to the model's node weights; sinks uniformly.
    pub traffic: TrafficModel,
    /// Filter length of the classical scheme.
    pub classical_m: usize,
    pub k_rule: KRule,
    /// Hop limit of the classical scheme; `None` means four times the diameter.
    pub ttl: Option<usize>,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            topology: "net".into(),
            sinks: vec![1, 10, 20],
            trials: 1000,
            seed: 0,
            scheme: Scheme::Xbf,
            traffic: TrafficModel::default(),
            classical_m: 256,
            k_rule: KRule::OptimalPerTree,
            ttl: None,
            exec: Execution::default(),
        }
    }
}

impl ExperimentConfig {
    /// First 16 hex digits of the SHA-256 of the JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config is plain data");
        Sha256::digest(&json)[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// One simulated packet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub topology: String,
    pub scheme: Scheme,
    pub sinks: usize,
    pub trial: usize,
    pub hdr_bits: usize,
    pub hdr_bits_compressed: usize,
    pub partitions: usize,
    pub poppers_on_tree: usize,
    pub pops: usize,
    pub false_firings: usize,
    #[serde(rename = "loop")]
    pub looped: bool,
    /// Mean over sinks of the nodes on the source-to-sink path (sink excluded) that popped.
    /// XBF only; not part of the CSV schema.
    #[serde(skip)]
    pub popping_switches_on_path: f64,
    /// Mean over sinks of the pop events at the nodes of the source-to-sink path (sink excluded),
    /// i.e. the popping cost the packet sees along that path.
    #[serde(skip)]
    pub pops_on_path: f64,
}

/// Aggregates for one sink count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinkSummary {
    pub sinks: usize,
    pub trials: usize,
    pub hdr_bits: Spread,
    pub hdr_bits_compressed: Spread,
    pub partitions: Spread,
    pub poppers_on_tree: Spread,
    pub pops: Spread,
    pub popping_switches_on_path: Spread,
    pub pops_on_path: Spread,
    pub false_firings: Spread,
    pub loop_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub topology: String,
    pub scheme: Scheme,
    pub config_hash: String,
    pub nodes: usize,
    pub links: usize,
    pub partition_count: usize,
    pub popper_count: usize,
    pub per_sinks: Vec<SinkSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<TrialRow>,
    pub summary: ExperimentSummary,
}

/// Runs `cfg.trials` packets for every sink count. `parts` is required for XBF and ignored by the
/// classical scheme. Trial `t` at sink count `s` draws from the stream `(seed, s, t)`, so results
/// do not depend on scheduling.
pub fn run_experiment(
    g: &NetworkGraph,
    parts: Option<&Partitioning>,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, SimError> {
    if cfg.trials == 0 {
        return Err(SimError::InvalidConfig("trials must be at least 1".into()));
    }
    cfg.traffic.validate().map_err(SimError::InvalidConfig)?;
    let n = g.node_count();
    if let Some(&s) = cfg.sinks.iter().find(|&&s| s == 0 || s >= n) {
        return Err(SimError::InvalidConfig(format!(
            "sink count {s} must lie in 1..{n}"
        )));
    }
    let parts = match (cfg.scheme, parts) {
        (Scheme::Xbf, None) => {
            return Err(SimError::InvalidConfig(
                "the XBF scheme needs a partitioning".into(),
            ))
        }
        (_, p) => p,
    };
    if cfg.scheme == Scheme::Classical && cfg.classical_m == 0 {
        return Err(SimError::InvalidConfig(
            "classical_m must be at least 1".into(),
        ));
    }
    let sources = WeightedIndex::new(cfg.traffic.node_weights(g))
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    let ttl = cfg.ttl.unwrap_or_else(|| 4 * g.diameter().max(1) as usize);

    let mut rows = Vec::with_capacity(cfg.sinks.len() * cfg.trials);
    let mut per_sinks = Vec::with_capacity(cfg.sinks.len());
    for &s in &cfg.sinks {
        let batch = cfg
            .exec
            .try_map(cfg.trials, |t| -> Result<TrialRow, SimError> {
                let mut r = rng::stream(cfg.seed, &[s as u64, t as u64]);
                let source = NodeId(sources.sample(&mut r) as u32);
                let sinks = sample_sinks(&mut r, n, source, s);
                let tree = build_multicast_tree(g, source, &sinks)?;
                let row = |hdr_bits,
                           hdr_bits_compressed,
                           partitions,
                           poppers_on_tree,
                           pops,
                           false_firings,
                           looped| TrialRow {
                    topology: cfg.topology.clone(),
                    scheme: cfg.scheme,
                    sinks: s,
                    trial: t,
                    hdr_bits,
                    hdr_bits_compressed,
                    partitions,
                    poppers_on_tree,
                    pops,
                    false_firings,
                    looped,
                    popping_switches_on_path: 0.0,
                    pops_on_path: 0.0,
                };
                match (cfg.scheme, parts) {
                    (Scheme::Xbf, Some(p)) => {
                        let entry = entry_partition(g, p, &tree)?;
                        let header = build_header(&tree, p, entry)?;
                        let trace = forward_xbf(g, p, &tree, &header, entry);
                        let popping = trace.popping_nodes();
                        let (mut switches, mut path_pops) = (0usize, 0usize);
                        for &v in &tree.sinks {
                            let path = tree.path_to(g, v);
                            for hop in path.windows(2) {
                                if popping.binary_search(&hop[0]).is_ok() {
                                    switches += 1;
                                }
                                path_pops += trace.pops.iter().filter(|e| e.node == hop[0]).count();
                            }
                        }
                        let per_sink = tree.sinks.len() as f64;
                        Ok(TrialRow {
                            popping_switches_on_path: switches as f64 / per_sink,
                            pops_on_path: path_pops as f64 / per_sink,
                            ..row(
                                header.raw_bits(),
                                header.compressed_bits(),
                                header.zbf.len(),
                                popping.len(),
                                trace.pops.len(),
                                trace.false_firings.len(),
                                trace.loop_detected,
                            )
                        })
                    }
                    _ => {
                        let m = cfg.classical_m;
                        let k = cfg.k_rule.k(m, tree.links.len());
                        let ids = gen_random_ids(
                            g.link_count(),
                            m,
                            k,
                            rng::derive_seed(cfg.seed, &[s as u64, t as u64, 1]),
                        )
                        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
                        let f = ids.filter_of(&tree.links);
                        let trace = deliver_classical(g, &ids, &f, &tree, ttl)?;
                        let compressed = compress_bits((0..m).map(|i| f.get(i))).bit_len;
                        Ok(row(
                            m,
                            compressed,
                            0,
                            0,
                            0,
                            trace.false_firings.len(),
                            trace.loop_detected,
                        ))
                    }
                }
            })?;
        per_sinks.push(summarise(s, &batch));
        rows.extend(batch);
    }
    let summary = ExperimentSummary {
        topology: cfg.topology.clone(),
        scheme: cfg.scheme,
        config_hash: cfg.hash(),
        nodes: n,
        links: g.link_count(),
        partition_count: parts.map_or(0, |p| p.partition_count()),
        popper_count: parts.map_or(0, |p| p.poppers().len()),
        per_sinks,
    };
    Ok(ExperimentReport { rows, summary })
}

fn summarise(sinks: usize, rows: &[TrialRow]) -> SinkSummary {
    let col = |f: fn(&TrialRow) -> f64| Spread::of(&rows.iter().map(f).collect::<Vec<_>>());
    SinkSummary {
        sinks,
        trials: rows.len(),
        hdr_bits: col(|r| r.hdr_bits as f64),
        hdr_bits_compressed: col(|r| r.hdr_bits_compressed as f64),
        partitions: col(|r| r.partitions as f64),
        poppers_on_tree: col(|r| r.poppers_on_tree as f64),
        pops: col(|r| r.pops as f64),
        popping_switches_on_path: col(|r| r.popping_switches_on_path),
        pops_on_path: col(|r| r.pops_on_path),
        false_firings: col(|r| r.false_firings as f64),
        loop_fraction: rows.iter().filter(|r| r.looped).count() as f64 / rows.len() as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{jigsaw, PartitionConfig};

    #[test]
    fn single_trial_single_partition() {
        let g = crate::topo::gen_ba(30, 2, 1).unwrap();
        let p = Partitioning::from_assignment(&g, &vec![0; g.link_count()], 256).unwrap();
        let cfg = ExperimentConfig {
            sinks: vec![1],
            trials: 1,
            ..Default::default()
        };
        let rep = run_experiment(&g, Some(&p), &cfg).unwrap();
        assert_eq!(rep.rows.len(), 1);
        let r = &rep.rows[0];
        assert_eq!(r.hdr_bits, 256 + 1 + 256);
        assert_eq!((r.false_firings, r.looped, r.pops), (0, false, 0));
    }

    #[test]
    fn deterministic_across_execution_modes() {
        let g = crate::topo::gen_ba(200, 2, 2).unwrap();
        let pc = PartitionConfig {
            max_partition_size: 64,
            ..Default::default()
        };
        let p = jigsaw(&g, &vec![1.0; g.link_count()], &pc).unwrap();
        let mut cfg = ExperimentConfig {
            sinks: vec![1, 5],
            trials: 60,
            seed: 4,
            ..Default::default()
        };
        let a = run_experiment(&g, Some(&p), &cfg).unwrap();
        cfg.exec = Execution::Sequential;
        let b = run_experiment(&g, Some(&p), &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.rows.iter().all(|r| r.false_firings == 0 && !r.looped));
        assert_eq!(a.summary.config_hash.len(), 16);
    }

    #[test]
    fn partitions_touched_grow_with_sinks() {
        let g = crate::topo::gen_ba(300, 2, 5).unwrap();
        let pc = PartitionConfig {
            max_partition_size: 64,
            ..Default::default()
        };
        let p = jigsaw(&g, &vec![1.0; g.link_count()], &pc).unwrap();
        let cfg = ExperimentConfig {
            sinks: vec![1, 5, 10, 20],
            trials: 200,
            ..Default::default()
        };
        let rep = run_experiment(&g, Some(&p), &cfg).unwrap();
        let means: Vec<f64> = rep
            .summary
            .per_sinks
            .iter()
            .map(|s| s.partitions.mean)
            .collect();
        assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
    }

    #[test]
    fn saturated_classical_filters_misfire() {
        let g = crate::topo::gen_ba(200, 2, 5).unwrap();
        let cfg = ExperimentConfig {
            scheme: Scheme::Classical,
            classical_m: 64,
            sinks: vec![20],
            trials: 30,
            ..Default::default()
        };
        let rep = run_experiment(&g, None, &cfg).unwrap();
        assert!(rep.rows.iter().any(|r| r.false_firings > 0));
        assert!(rep.rows.iter().all(|r| r.hdr_bits == 64));
    }

    #[test]
    fn invalid_configs() {
        let g = crate::topo::gen_ba(20, 2, 5).unwrap();
        let base = ExperimentConfig {
            trials: 1,
            sinks: vec![1],
            ..Default::default()
        };
        assert!(run_experiment(&g, None, &base).is_err());
        let bad = ExperimentConfig {
            sinks: vec![20],
            scheme: Scheme::Classical,
            ..base.clone()
        };
        assert!(run_experiment(&g, None, &bad).is_err());
    }
}
