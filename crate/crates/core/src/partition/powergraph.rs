use rand::seq::SliceRandom;

use crate::graph::{LinkId, NetworkGraph};
use crate::rng;

use super::{PartitionError, Partitioning};

/// Greedy streaming vertex-cut partitioning, applied recursively.
///
/// Links are streamed in a seeded random order into `ceil(|E| / target)` partitions. Each link
/// goes to the partition that introduces the fewest new endpoint replicas, ties to the least
/// loaded, then the lowest id. Any partition left with more than `target` links is split again
/// the same way. A split that makes no progress falls back to cutting the stream into
/// `target`-sized chunks.
pub fn powergraph_partition(
    g: &NetworkGraph,
    target: usize,
    seed: u64,
) -> Result<Partitioning, PartitionError> {
    if target == 0 {
        return Err(PartitionError::InvalidConfig(
            "target must be at least 1".into(),
        ));
    }
    let links: Vec<LinkId> = g.link_ids().collect();
    let mut parts: Vec<Vec<LinkId>> = Vec::new();
    split(g, links, target, seed, 0, &mut parts);
    let mut assignment = vec![0u32; g.link_count()];
    for (p, members) in parts.iter().enumerate() {
        for l in members {
            assignment[l.index()] = p as u32;
        }
    }
    Partitioning::from_assignment(g, &assignment, target)
}

fn split(
    g: &NetworkGraph,
    mut links: Vec<LinkId>,
    target: usize,
    seed: u64,
    depth: u64,
    out: &mut Vec<Vec<LinkId>>,
) {
    if links.len() <= target {
        if !links.is_empty() {
            out.push(links);
        }
        return;
    }
    let k = links.len().div_ceil(target);
    let mut r = rng::stream(seed, &[depth, out.len() as u64]);
    links.shuffle(&mut r);
    let buckets = stream_greedy(g, &links, k);
    if buckets.iter().any(|b| b.len() == links.len()) {
        for chunk in links.chunks(target) {
            out.push(chunk.to_vec());
        }
        return;
    }
    for b in buckets {
        split(g, b, target, seed, depth + 1, out);
    }
}

fn stream_greedy(g: &NetworkGraph, stream: &[LinkId], k: usize) -> Vec<Vec<LinkId>> {
    // replicas[node] = partitions already holding a copy of the node
    let mut replicas: Vec<Vec<u32>> = vec![Vec::new(); g.node_count()];
    let mut buckets: Vec<Vec<LinkId>> = vec![Vec::new(); k];
    for &e in stream {
        let link = g.link(e);
        let (a, b) = (&replicas[link.src.index()], &replicas[link.dst.index()]);
        let best = (0..k as u32)
            .min_by_key(|&p| {
                let new_replicas = (!a.contains(&p)) as u8 + (!b.contains(&p)) as u8;
                (new_replicas, buckets[p as usize].len(), p)
            })
            .expect("k >= 1");
        buckets[best as usize].push(e);
        for n in [link.src, link.dst] {
            let r = &mut replicas[n.index()];
            if !r.contains(&best) {
                r.push(best);
            }
        }
    }
    buckets
}
