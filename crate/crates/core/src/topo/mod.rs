//! Synthetic topologies and traffic.

mod traffic;

use std::path::PathBuf;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{build_network_graph, edgelist, GraphError, NetworkGraph};
use crate::rng;

pub use traffic::{gen_traffic, gen_traffic_with, TrafficKind, TrafficModel, DEFAULT_MAX_SINKS};

#[derive(Debug, Error)]
pub enum TopoError {
    #[error("invalid topology parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Barabási–Albert preferential attachment.
///
/// Growth starts from `m` unconnected seed nodes; each new node attaches to `m` distinct existing
/// nodes drawn with probability proportional to degree (the seed nodes are the targets of the
/// first arrival). The result has exactly `m (n - m)` undirected edges, emitted as link pairs.
pub fn gen_ba(n: usize, m: usize, seed: u64) -> Result<NetworkGraph, TopoError> {
    if m < 1 || n <= m {
        return Err(TopoError::InvalidParams(format!(
            "BA needs n > m >= 1, got n={n} m={m}"
        )));
    }
    let mut r = rng::stream(seed, &[0xBA]);
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(m * (n - m));
    let mut targets: Vec<usize> = (0..m).collect();
    let mut repeated: Vec<usize> = Vec::with_capacity(2 * m * n);
    for source in m..n {
        for &t in &targets {
            edges.push((source, t));
        }
        repeated.extend_from_slice(&targets);
        repeated.extend(std::iter::repeat_n(source, m));
        targets.clear();
        while targets.len() < m {
            let x = repeated[r.gen_range(0..repeated.len())];
            if !targets.contains(&x) {
                targets.push(x);
            }
        }
    }
    Ok(symmetric_graph(&edges)?)
}

/// Erdős–Rényi `G(n, p)`; only the largest component is kept.
pub fn gen_er(n: usize, p: f64, seed: u64) -> Result<NetworkGraph, TopoError> {
    if n < 2 || !(p > 0.0 && p <= 1.0) {
        return Err(TopoError::InvalidParams(format!(
            "ER needs n >= 2 and 0 < p <= 1, got n={n} p={p}"
        )));
    }
    let mut r = rng::stream(seed, &[0xE2]);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if p >= 1.0 || r.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    if edges.is_empty() {
        return Err(TopoError::Graph(GraphError::Empty));
    }
    Ok(symmetric_graph(&edges)?)
}

/// Edge probability `(1 + eps) ln(n) / n`, just above the connectivity threshold.
pub fn er_threshold_p(n: usize, eps: f64) -> f64 {
    (1.0 + eps) * (n as f64).ln() / n as f64
}

fn symmetric_graph(edges: &[(usize, usize)]) -> Result<NetworkGraph, GraphError> {
    let labels: Vec<String> = {
        let n = edges.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0) + 1;
        (0..n).map(|i| i.to_string()).collect()
    };
    let (g, _) = build_network_graph(edges.iter().flat_map(|&(a, b)| {
        [
            (labels[a].as_str(), labels[b].as_str(), 1.0),
            (labels[b].as_str(), labels[a].as_str(), 1.0),
        ]
    }))?;
    Ok(g)
}

/// Where a topology comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TopoKind {
    Ba {
        n: usize,
        m: usize,
    },
    /// `p` absent means the connectivity-threshold value with `eps = 0.1`.
    Er {
        n: usize,
        p: Option<f64>,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopoSpec {
    #[serde(flatten)]
    pub kind: TopoKind,
    #[serde(default)]
    pub seed: u64,
    /// Edge-list files only: add the reverse of every link.
    #[serde(default)]
    pub symmetrize: bool,
}

impl TopoSpec {
    pub fn build(&self) -> Result<NetworkGraph, TopoError> {
        match &self.kind {
            TopoKind::Ba { n, m } => gen_ba(*n, *m, self.seed),
            TopoKind::Er { n, p } => {
                gen_er(*n, p.unwrap_or_else(|| er_threshold_p(*n, 0.1)), self.seed)
            }
            TopoKind::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|source| TopoError::Io {
                    path: path.clone(),
                    source,
                })?;
                let entries = edgelist::parse_edge_list(&text, self.symmetrize)?;
                let (g, report) = build_network_graph(entries)?;
                if report.dropped_nodes > 0 {
                    log::info!(
                        "{}: dropped {} nodes and {} links outside the largest component",
                        path.display(),
                        report.dropped_nodes,
                        report.dropped_links
                    );
                }
                Ok(g)
            }
        }
    }

    /// Short label used in output tables.
    pub fn name(&self) -> String {
        match &self.kind {
            TopoKind::Ba { n, m } => format!("ba-{n}-{m}"),
            TopoKind::Er { n, p: Some(p) } => format!("er-{n}-{p}"),
            TopoKind::Er { n, p: None } => format!("er-{n}"),
            TopoKind::File { path } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "file".into()),
        }
    }
}
