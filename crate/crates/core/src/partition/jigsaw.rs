use crate::graph::{collapse_legacy, ConnectivityGraph, NetworkGraph, NodeId};

use super::{vertex_partition, PartitionConfig, PartitionError, Partitioning};

/// Traffic-aware partitioning: weight links, translate to the connectivity graph, partition its
/// vertices with the multilevel volume minimiser, map back to links.
///
/// `weights` holds one non-negative weight per link (packets per time unit, or any proxy such as
/// betweenness). Ignored when `cfg.traffic_aware` is false.
pub fn jigsaw(
    g: &NetworkGraph,
    weights: &[f64],
    cfg: &PartitionConfig,
) -> Result<Partitioning, PartitionError> {
    jigsaw_with_legacy(g, weights, cfg, &[])
}

/// [`jigsaw`] for networks where the `legacy` switches cannot pop: all links touching a legacy
/// switch are kept in one partition.
pub fn jigsaw_with_legacy(
    g: &NetworkGraph,
    weights: &[f64],
    cfg: &PartitionConfig,
    legacy: &[NodeId],
) -> Result<Partitioning, PartitionError> {
    cfg.validate()?;
    let uniform;
    let weights = if cfg.traffic_aware {
        weights
    } else {
        uniform = vec![1.0; g.link_count()];
        &uniform
    };
    if let Some((i, &w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !w.is_finite() || **w < 0.0)
    {
        return Err(crate::graph::GraphError::InvalidTraffic {
            index: i,
            traffic: w,
        }
        .into());
    }
    let cap = cfg.max_partition_size;
    let mut cg = ConnectivityGraph::from_network(g, weights)?;
    if !legacy.is_empty() {
        cg = collapse_legacy(&cg, g, legacy, Some(cap))?;
    }
    let k = cfg.partition_count(g.link_count());
    let vertex_parts = vertex_partition(&cg, k, cap, cfg.seed)?;
    let mut assignment = vec![0u32; g.link_count()];
    for (v, vertex) in cg.vertices().iter().enumerate() {
        for &l in &vertex.links {
            assignment[l.index()] = vertex_parts[v];
        }
    }
    log::debug!(
        "jigsaw: {} links, k = {k}, cap = {cap}, {} connectivity vertices",
        g.link_count(),
        cg.vertex_count()
    );
    Partitioning::from_assignment(g, &assignment, cap)
}
