//! Network graphs and the link-adjacency graph used for partitioning.

mod betweenness;
mod connectivity;
pub mod edgelist;
mod network;

use thiserror::Error;

pub use betweenness::betweenness_weights;
pub use connectivity::{build_connectivity_graph, collapse_legacy, CgVertex, ConnectivityGraph};
pub use network::{build_network_graph, IngestReport, Link, LinkId, NetworkGraph, NodeId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge list is empty")]
    Empty,
    #[error("entry {index}: self-loop on node `{node}`")]
    SelfLoop { index: usize, node: String },
    #[error("entry {index}: traffic {traffic} is not a finite non-negative number")]
    InvalidTraffic { index: usize, traffic: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("expected {expected} per-link values, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("node {0} is not part of the graph")]
    UnknownNode(NodeId),
    #[error(
        "legacy switch {node} forces super-vertex {vertex} of {size} links, above the partition cap {cap}"
    )]
    Unpartitionable {
        node: NodeId,
        vertex: usize,
        size: usize,
        cap: usize,
    },
}
