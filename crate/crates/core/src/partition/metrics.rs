use serde::Serialize;

use crate::graph::{ConnectivityGraph, LinkId, NetworkGraph};

use super::{popper_flags, PartitionError, PartitionId, Partitioning};

/// Popping count for a packet arriving over `link`: the distinct partitions among the links it
/// may leave by (the reverse of `link` excluded), other than `link`'s own.
pub fn phi(g: &NetworkGraph, parts: &Partitioning, link: LinkId) -> Result<usize, PartitionError> {
    phi_restricted(g, parts, link, |_| true)
}

/// [`phi`] counting only partitions accepted by `keep`, e.g. the partitions a header carries.
pub fn phi_restricted(
    g: &NetworkGraph,
    parts: &Partitioning,
    link: LinkId,
    keep: impl Fn(PartitionId) -> bool,
) -> Result<usize, PartitionError> {
    if link.index() >= parts.link_count() || link.index() >= g.link_count() {
        return Err(PartitionError::UnknownLink(link));
    }
    let here = parts.partition_of(link);
    let l = g.link(link);
    let mut seen: Vec<PartitionId> = Vec::new();
    for &next in g.out_links(l.dst) {
        if g.link(next).dst == l.src {
            continue;
        }
        let p = parts.partition_of(next);
        if p != here && keep(p) && !seen.contains(&p) {
            seen.push(p);
        }
    }
    Ok(seen.len())
}

/// Traffic-weighted communication volume of a vertex assignment over a connectivity graph.
pub fn totalv(cg: &ConnectivityGraph, vertex_parts: &[PartitionId]) -> f64 {
    let mut seen: Vec<PartitionId> = Vec::new();
    cg.vertices()
        .iter()
        .enumerate()
        .map(|(v, vertex)| {
            seen.clear();
            for &u in cg.out_neighbors(v) {
                let p = vertex_parts[u as usize];
                if p != vertex_parts[v] && !seen.contains(&p) {
                    seen.push(p);
                }
            }
            vertex.weight * seen.len() as f64
        })
        .sum()
}

/// Summary of a partitioning's cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionQuality {
    pub totalv: f64,
    /// Popping count per link, indexed by link id.
    pub phi: Vec<usize>,
    pub popper_count: usize,
    pub partition_count: usize,
    pub max_fill: usize,
    pub min_fill: usize,
}

/// Computes `totalv`, per-link popping counts and fill statistics. The popper set is recomputed
/// from the assignment and must agree with the stored one.
pub fn quality(
    g: &NetworkGraph,
    parts: &Partitioning,
    cg: &ConnectivityGraph,
) -> Result<PartitionQuality, PartitionError> {
    if cg.link_count() != parts.link_count() {
        return Err(PartitionError::AssignmentLength {
            expected: cg.link_count(),
            got: parts.link_count(),
        });
    }
    let mut vertex_parts = Vec::with_capacity(cg.vertex_count());
    for (v, vertex) in cg.vertices().iter().enumerate() {
        let p = parts.partition_of(vertex.links[0]);
        if vertex.links.iter().any(|&l| parts.partition_of(l) != p) {
            return Err(PartitionError::SplitVertex(v));
        }
        vertex_parts.push(p);
    }
    let flags = popper_flags(g, parts.assignment());
    if let Some(n) = g.nodes().find(|&n| flags[n.index()] != parts.is_popper(n)) {
        return Err(PartitionError::PopperMismatch(n));
    }
    let phi = g
        .link_ids()
        .map(|e| phi(g, parts, e))
        .collect::<Result<Vec<_>, _>>()?;
    let fill = parts.fill();
    Ok(PartitionQuality {
        totalv: totalv(cg, &vertex_parts),
        phi,
        popper_count: flags.iter().filter(|&&f| f).count(),
        partition_count: parts.partition_count(),
        max_fill: fill.iter().copied().max().unwrap_or(0),
        min_fill: fill.iter().copied().min().unwrap_or(0),
    })
}
