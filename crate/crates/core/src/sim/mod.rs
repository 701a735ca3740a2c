//! Packet-level forwarding simulation.

mod deliver;
mod experiment;
mod tree;

use thiserror::Error;

use crate::graph::{LinkId, NodeId};
use crate::header::HeaderError;
use crate::partition::PartitionError;

pub use deliver::{
    deliver_classical, deliver_xbf, entry_partition, expected_pops, DeliveryTrace, PopEvent,
};
pub use experiment::{
    run_experiment, ExperimentConfig, ExperimentReport, ExperimentSummary, Scheme, SinkSummary,
    TrialRow,
};
pub use tree::{build_multicast_tree, sample_sinks, MulticastTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("node {0} is not part of the graph")]
    UnknownNode(NodeId),
    #[error("sink {sink} is unreachable from {from}")]
    Unreachable { from: NodeId, sink: NodeId },
    #[error("tree link {0} is not assigned to a partition")]
    UnassignedLink(LinkId),
    #[error("filter has {got} bits, identifiers have {expected}")]
    FilterLength { expected: usize, got: usize },
    #[error(transparent)]
    Header(#[from] HeaderError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}
