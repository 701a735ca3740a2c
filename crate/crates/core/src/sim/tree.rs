use std::collections::VecDeque;

use rand::seq::index;
use serde::Serialize;

use crate::graph::{LinkId, NetworkGraph, NodeId};
use crate::rng::Rng;

use super::SimError;

/// Union of shortest paths from `source` to every sink.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MulticastTree {
    pub source: NodeId,
    /// Sorted, distinct.
    pub sinks: Vec<NodeId>,
    /// Sorted by link id.
    pub links: Vec<LinkId>,
}

impl MulticastTree {
    pub fn contains_link(&self, l: LinkId) -> bool {
        self.links.binary_search(&l).is_ok()
    }

    pub fn is_sink(&self, v: NodeId) -> bool {
        self.sinks.binary_search(&v).is_ok()
    }

    /// Nodes from the source to `sink` along the tree, both ends included. Empty if `sink` is
    /// not on the tree.
    pub fn path_to(&self, g: &NetworkGraph, sink: NodeId) -> Vec<NodeId> {
        let mut path = vec![sink];
        let mut v = sink;
        while v != self.source {
            match self.links.iter().find(|&&l| g.link(l).dst == v) {
                Some(&l) => v = g.link(l).src,
                None => return Vec::new(),
            }
            path.push(v);
        }
        path.reverse();
        path
    }

    /// Source plus every link head, sorted.
    pub fn nodes(&self, g: &NetworkGraph) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = std::iter::once(self.source)
            .chain(self.links.iter().map(|&l| g.link(l).dst))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Shortest-path tree from `source` restricted to the paths towards `sinks`.
///
/// BFS expands out-links in ascending destination order, so each node's parent is the earliest
/// discovered predecessor on a shortest path.
pub fn build_multicast_tree(
    g: &NetworkGraph,
    source: NodeId,
    sinks: &[NodeId],
) -> Result<MulticastTree, SimError> {
    let n = g.node_count();
    if source.index() >= n {
        return Err(SimError::UnknownNode(source));
    }
    if sinks.is_empty() {
        return Err(SimError::InvalidConfig(
            "a multicast tree needs at least one sink".into(),
        ));
    }
    let mut sinks = sinks.to_vec();
    sinks.sort_unstable();
    sinks.dedup();
    if let Some(&bad) = sinks.iter().find(|v| v.index() >= n) {
        return Err(SimError::UnknownNode(bad));
    }
    if sinks.contains(&source) {
        return Err(SimError::InvalidConfig(format!(
            "source {source} cannot be its own sink"
        )));
    }

    let mut parent: Vec<Option<LinkId>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut wanted = vec![false; n];
    for s in &sinks {
        wanted[s.index()] = true;
    }
    let mut remaining = sinks.len();
    let mut queue = VecDeque::from([source]);
    seen[source.index()] = true;
    'bfs: while let Some(v) = queue.pop_front() {
        for &e in g.out_links(v) {
            let d = g.link(e).dst;
            if seen[d.index()] {
                continue;
            }
            seen[d.index()] = true;
            parent[d.index()] = Some(e);
            if wanted[d.index()] {
                remaining -= 1;
                if remaining == 0 {
                    break 'bfs;
                }
            }
            queue.push_back(d);
        }
    }
    if let Some(&missing) = sinks.iter().find(|s| !seen[s.index()]) {
        return Err(SimError::Unreachable {
            from: source,
            sink: missing,
        });
    }

    let mut on_tree = vec![false; g.link_count()];
    let mut links = Vec::new();
    for &s in &sinks {
        let mut v = s;
        while let Some(e) = parent[v.index()] {
            if on_tree[e.index()] {
                break;
            }
            on_tree[e.index()] = true;
            links.push(e);
            v = g.link(e).src;
        }
    }
    links.sort_unstable();
    Ok(MulticastTree {
        source,
        sinks,
        links,
    })
}

/// `count` distinct nodes of `0..n` other than `source`, sorted.
///
/// # Panics
/// If `count > n - 1`.
pub fn sample_sinks(r: &mut Rng, n: usize, source: NodeId, count: usize) -> Vec<NodeId> {
    assert!(
        count < n,
        "cannot pick {count} sinks among {} other nodes",
        n.saturating_sub(1)
    );
    let mut v: Vec<NodeId> = index::sample(r, n - 1, count)
        .into_iter()
        .map(|i| {
            let i = i as u32;
            NodeId(if i >= source.0 { i + 1 } else { i })
        })
        .collect();
    v.sort_unstable();
    v
}
