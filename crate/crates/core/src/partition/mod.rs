//! Edge partitioning of the network: every directed link gets a partition, partitions hold at
//! most `max_partition_size` links, and each link gets a unique bit inside its partition.
//!
//! [`jigsaw`] is the traffic-aware partitioner (multilevel vertex partitioning of the
//! connectivity graph, minimising traffic-weighted communication volume); [`powergraph_partition`]
//! is the streaming vertex-cut baseline.

mod export;
mod jigsaw;
mod metrics;
mod multilevel;
mod powergraph;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, LinkId, NetworkGraph, NodeId};

pub use export::PartitioningExport;
pub use jigsaw::{jigsaw, jigsaw_with_legacy};
pub use metrics::{phi, phi_restricted, quality, totalv, PartitionQuality};
pub use multilevel::{vertex_partition, vertex_partition_with_stats, VertexPartitionStats};
pub use powergraph::powergraph_partition;

/// Partition identifier, dense in `0..partition_count`.
pub type PartitionId = u32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("invalid partition config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("cannot fit {total} links into {k} partitions of at most {cap}")]
    Infeasible { k: usize, cap: usize, total: usize },
    #[error("assignment covers {got} links, graph has {expected}")]
    AssignmentLength { expected: usize, got: usize },
    #[error("partition {partition} holds {size} links, above the cap {cap}")]
    CapExceeded {
        partition: usize,
        size: usize,
        cap: usize,
    },
    #[error("link {0} is not part of the partitioning")]
    UnknownLink(LinkId),
    #[error("connectivity vertex {0} spans several partitions")]
    SplitVertex(usize),
    #[error("stored popper set disagrees with the assignment at node {0}")]
    PopperMismatch(NodeId),
}

/// Knobs for [`jigsaw`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PartitionConfig {
    /// Upper bound on links per partition; also the filter length in bits.
    pub max_partition_size: usize,
    /// Multiplier on the minimum partition count (`ν`).
    pub imbalance: f64,
    pub seed: u64,
    /// When false every link weighs 1 regardless of the supplied weights.
    pub traffic_aware: bool,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            max_partition_size: 256,
            imbalance: 1.1,
            seed: 0,
            traffic_aware: true,
        }
    }
}

impl PartitionConfig {
    pub fn validate(&self) -> Result<(), PartitionError> {
        if self.max_partition_size == 0 {
            return Err(PartitionError::InvalidConfig(
                "max_partition_size must be at least 1".into(),
            ));
        }
        if !self.imbalance.is_finite() || self.imbalance < 1.0 {
            return Err(PartitionError::InvalidConfig(format!(
                "imbalance must be >= 1, got {}",
                self.imbalance
            )));
        }
        Ok(())
    }

    /// Number of partitions requested for `links` links.
    ///
    /// One partition when everything fits, otherwise `ceil(links / cap * imbalance)`.
    pub fn partition_count(&self, links: usize) -> usize {
        if links <= self.max_partition_size {
            return 1;
        }
        let k = (links as f64 / self.max_partition_size as f64 * self.imbalance).ceil() as usize;
        k.max(links.div_ceil(self.max_partition_size))
    }
}

/// An assignment of every directed link to a partition plus everything derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Partitioning {
    max_partition_size: usize,
    assignment: Vec<PartitionId>,
    members: Vec<Vec<LinkId>>,
    bit_of: Vec<u32>,
    poppers: Vec<NodeId>,
    is_popper: Vec<bool>,
}

impl Partitioning {
    /// Validates `assignment` (one entry per link) and derives members, one-bit identifiers and
    /// the popper set. Empty partition ids are squeezed out, keeping relative order.
    pub fn from_assignment(
        g: &NetworkGraph,
        assignment: &[PartitionId],
        max_partition_size: usize,
    ) -> Result<Partitioning, PartitionError> {
        if assignment.len() != g.link_count() {
            return Err(PartitionError::AssignmentLength {
                expected: g.link_count(),
                got: assignment.len(),
            });
        }
        if max_partition_size == 0 {
            return Err(PartitionError::InvalidConfig(
                "max_partition_size must be at least 1".into(),
            ));
        }
        let highest = assignment.iter().copied().max().unwrap_or(0) as usize;
        let mut used = vec![false; highest + 1];
        for &p in assignment {
            used[p as usize] = true;
        }
        let mut relabel = vec![u32::MAX; highest + 1];
        let mut count = 0u32;
        for (p, &u) in used.iter().enumerate() {
            if u {
                relabel[p] = count;
                count += 1;
            }
        }
        let assignment: Vec<PartitionId> =
            assignment.iter().map(|&p| relabel[p as usize]).collect();

        let mut members = vec![Vec::new(); count as usize];
        for (i, &p) in assignment.iter().enumerate() {
            members[p as usize].push(LinkId(i as u32));
        }
        let mut bit_of = vec![0u32; assignment.len()];
        for (p, links) in members.iter().enumerate() {
            if links.len() > max_partition_size {
                return Err(PartitionError::CapExceeded {
                    partition: p,
                    size: links.len(),
                    cap: max_partition_size,
                });
            }
            // ascending link order: links are pushed in id order above
            for (bit, &l) in links.iter().enumerate() {
                bit_of[l.index()] = bit as u32;
            }
        }
        let is_popper = popper_flags(g, &assignment);
        let poppers = g.nodes().filter(|n| is_popper[n.index()]).collect();
        Ok(Partitioning {
            max_partition_size,
            assignment,
            members,
            bit_of,
            poppers,
            is_popper,
        })
    }

    pub fn max_partition_size(&self) -> usize {
        self.max_partition_size
    }

    pub fn partition_count(&self) -> usize {
        self.members.len()
    }

    pub fn link_count(&self) -> usize {
        self.assignment.len()
    }

    /// Partition of every link, indexed by link id.
    pub fn assignment(&self) -> &[PartitionId] {
        &self.assignment
    }

    #[inline]
    pub fn partition_of(&self, link: LinkId) -> PartitionId {
        self.assignment[link.index()]
    }

    /// Links of partition `p`, ascending.
    pub fn members(&self, p: PartitionId) -> &[LinkId] {
        &self.members[p as usize]
    }

    /// Position of `link`'s identifier bit within its partition filter.
    #[inline]
    pub fn bit_of(&self, link: LinkId) -> u32 {
        self.bit_of[link.index()]
    }

    /// Switches with incident links in two or more partitions, ascending.
    pub fn poppers(&self) -> &[NodeId] {
        &self.poppers
    }

    #[inline]
    pub fn is_popper(&self, node: NodeId) -> bool {
        self.is_popper[node.index()]
    }

    /// Number of links in each partition.
    pub fn fill(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }
}

/// `true` for nodes whose incident links span at least two partitions.
pub(crate) fn popper_flags(g: &NetworkGraph, assignment: &[PartitionId]) -> Vec<bool> {
    g.nodes()
        .map(|n| {
            let mut it = g.incident_links(n).map(|e| assignment[e.index()]);
            match it.next() {
                None => false,
                Some(first) => it.any(|p| p != first),
            }
        })
        .collect()
}
