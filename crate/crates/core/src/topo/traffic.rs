use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::graph::{NetworkGraph, NodeId};
use crate::rng;
use crate::sim::{build_multicast_tree, sample_sinks, SimError};

/// Sink counts during synthesis are uniform over `1..=DEFAULT_MAX_SINKS`.
pub const DEFAULT_MAX_SINKS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrafficKind {
    /// Every node sends the same amount of traffic.
    Uniform,
    /// A random `fraction` of nodes sends `multiplier` times the traffic.
    HighDemand { fraction: f64, multiplier: f64 },
    /// Like `HighDemand`, but the demand nodes form a BFS ball around a random centre.
    SpatialCluster { fraction: f64, multiplier: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficModel {
    #[serde(flatten)]
    pub kind: TrafficKind,
    /// Selects the demand nodes; independent of the trial seeds.
    #[serde(default)]
    pub seed: u64,
}

impl Default for TrafficModel {
    fn default() -> Self {
        TrafficModel {
            kind: TrafficKind::Uniform,
            seed: 0,
        }
    }
}

impl TrafficModel {
    pub fn uniform() -> Self {
        Self::default()
    }

    pub fn high_demand(fraction: f64, multiplier: f64, seed: u64) -> Self {
        TrafficModel {
            kind: TrafficKind::HighDemand {
                fraction,
                multiplier,
            },
            seed,
        }
    }

    pub fn spatial_cluster(fraction: f64, multiplier: f64, seed: u64) -> Self {
        TrafficModel {
            kind: TrafficKind::SpatialCluster {
                fraction,
                multiplier,
            },
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self.kind {
            TrafficKind::Uniform => Ok(()),
            TrafficKind::HighDemand {
                fraction,
                multiplier,
            }
            | TrafficKind::SpatialCluster {
                fraction,
                multiplier,
            } => {
                if !(fraction > 0.0 && fraction < 1.0) {
                    Err(format!(
                        "demand fraction must lie in (0, 1), got {fraction}"
                    ))
                } else if !(multiplier >= 1.0 && multiplier.is_finite()) {
                    Err(format!("demand multiplier must be >= 1, got {multiplier}"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Per-node traffic multiplier: `multiplier` for demand nodes, 1 elsewhere.
    pub fn node_weights(&self, g: &NetworkGraph) -> Vec<f64> {
        let n = g.node_count();
        let (fraction, multiplier, clustered) = match self.kind {
            TrafficKind::Uniform => return vec![1.0; n],
            TrafficKind::HighDemand {
                fraction,
                multiplier,
            } => (fraction, multiplier, false),
            TrafficKind::SpatialCluster {
                fraction,
                multiplier,
            } => (fraction, multiplier, true),
        };
        let count = ((fraction * n as f64).round() as usize).clamp(1, n);
        let mut r = rng::stream(self.seed, &[0xDE]);
        let chosen: Vec<NodeId> = if clustered {
            let centre = NodeId(r.gen_range(0..n as u32));
            bfs_order(g, centre).into_iter().take(count).collect()
        } else {
            let mut all: Vec<NodeId> = g.nodes().collect();
            all.shuffle(&mut r);
            all.truncate(count);
            all
        };
        let mut w = vec![1.0; n];
        for v in chosen {
            w[v.index()] = multiplier;
        }
        w
    }
}

/// Nodes in BFS order from `start`, neighbours visited by ascending id; unreachable nodes last.
fn bfs_order(g: &NetworkGraph, start: NodeId) -> Vec<NodeId> {
    let mut seen = vec![false; g.node_count()];
    let mut order = Vec::with_capacity(g.node_count());
    let mut queue = VecDeque::from([start]);
    seen[start.index()] = true;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &e in g.out_links(v) {
            let d = g.link(e).dst;
            if !seen[d.index()] {
                seen[d.index()] = true;
                queue.push_back(d);
            }
        }
    }
    order.extend(g.nodes().filter(|v| !seen[v.index()]));
    order
}

/// Per-link packet counts from `trials_per_node` multicast trees rooted at every node, each with a
/// uniform number of sinks in `1..=20`. Trees from demand nodes count `multiplier` times.
pub fn gen_traffic(
    g: &NetworkGraph,
    model: &TrafficModel,
    trials_per_node: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<f64>, SimError> {
    gen_traffic_with(g, model, trials_per_node, DEFAULT_MAX_SINKS, seed, exec)
}

/// [`gen_traffic`] with a configurable sink-count range `1..=max_sinks`.
pub fn gen_traffic_with(
    g: &NetworkGraph,
    model: &TrafficModel,
    trials_per_node: usize,
    max_sinks: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<f64>, SimError> {
    model.validate().map_err(SimError::InvalidConfig)?;
    if max_sinks == 0 {
        return Err(SimError::InvalidConfig(
            "max_sinks must be at least 1".into(),
        ));
    }
    let weights = model.node_weights(g);
    let n = g.node_count();
    let max_sinks = max_sinks.min(n.saturating_sub(1));
    if max_sinks == 0 {
        return Ok(vec![0.0; g.link_count()]);
    }
    let links = g.link_count();
    exec.chunked_fold(
        n,
        8,
        || Ok(vec![0.0; links]),
        |acc: &mut Result<Vec<f64>, SimError>, src| {
            let Ok(tau) = acc else { return };
            let source = NodeId(src as u32);
            let mut r = rng::stream(seed, &[src as u64]);
            for _ in 0..trials_per_node {
                let s = r.gen_range(1..=max_sinks);
                let sinks = sample_sinks(&mut r, n, source, s);
                match build_multicast_tree(g, source, &sinks) {
                    Ok(tree) => {
                        for &l in &tree.links {
                            tau[l.index()] += weights[src];
                        }
                    }
                    Err(e) => {
                        *acc = Err(e);
                        return;
                    }
                }
            }
        },
        |acc, part| {
            if let (Ok(a), Ok(b)) = (&mut *acc, &part) {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            } else if acc.is_ok() {
                *acc = part;
            }
        },
    )
}
