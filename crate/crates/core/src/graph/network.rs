use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::GraphError;

/// Dense index of a switch, `0..node_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

/// Dense index of a directed link, `0..link_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl LinkId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

/// A unidirectional link carrying `traffic` packets per time unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub src: NodeId,
    pub dst: NodeId,
    pub traffic: f64,
}

/// What ingestion discarded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    /// Parallel entries folded into an existing `(src, dst)` link.
    pub merged_duplicates: usize,
    /// Nodes outside the largest weakly connected component.
    pub dropped_nodes: usize,
    /// Distinct directed links outside the largest weakly connected component.
    pub dropped_links: usize,
}

/// Directed network graph restricted to its largest weakly connected component.
///
/// Nodes are numbered in order of first appearance in the input; links keep input order.
/// Out-link lists are sorted by destination id, which fixes all shortest-path tie-breaks.
#[derive(Debug, Clone)]
pub struct NetworkGraph {
    labels: Vec<String>,
    links: Vec<Link>,
    out: Vec<Vec<LinkId>>,
    inc: Vec<Vec<LinkId>>,
    reverse: Vec<Option<LinkId>>,
    by_pair: HashMap<(u32, u32), LinkId>,
    by_label: HashMap<String, NodeId>,
}

struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Builds a [`NetworkGraph`] from `(src, dst, traffic)` triples.
///
/// Repeated `(src, dst)` pairs are merged with their traffic summed. Only the largest weakly
/// connected component is kept (ties go to the component whose first node appeared earliest).
pub fn build_network_graph<I, L>(edges: I) -> Result<(NetworkGraph, IngestReport), GraphError>
where
    I: IntoIterator<Item = (L, L, f64)>,
    L: AsRef<str>,
{
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut pair_index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut raw: Vec<(usize, usize, f64)> = Vec::new();
    let mut report = IngestReport::default();
    let mut entries = 0usize;

    let mut intern = |label: &str, labels: &mut Vec<String>| -> usize {
        if let Some(&id) = ids.get(label) {
            return id;
        }
        let id = labels.len();
        labels.push(label.to_owned());
        ids.insert(label.to_owned(), id);
        id
    };

    for (index, (src, dst, traffic)) in edges.into_iter().enumerate() {
        entries += 1;
        let (src, dst) = (src.as_ref(), dst.as_ref());
        if src == dst {
            return Err(GraphError::SelfLoop {
                index,
                node: src.to_owned(),
            });
        }
        if !traffic.is_finite() || traffic < 0.0 {
            return Err(GraphError::InvalidTraffic { index, traffic });
        }
        let s = intern(src, &mut labels);
        let d = intern(dst, &mut labels);
        match pair_index.get(&(s, d)) {
            Some(&i) => {
                raw[i].2 += traffic;
                report.merged_duplicates += 1;
            }
            None => {
                pair_index.insert((s, d), raw.len());
                raw.push((s, d, traffic));
            }
        }
    }
    if entries == 0 {
        return Err(GraphError::Empty);
    }

    let n = labels.len();
    let mut dsu = DisjointSet::new(n);
    for &(s, d, _) in &raw {
        dsu.union(s, d);
    }
    let mut best: Option<(usize, usize)> = None; // (size, root)
    for v in 0..n {
        let root = dsu.find(v);
        let size = dsu.size[root];
        if best.is_none_or(|(s, _)| size > s) {
            best = Some((size, root));
        }
    }
    let (_, keep_root) = best.expect("non-empty input has at least one node");

    let mut remap = vec![u32::MAX; n];
    let mut kept_labels = Vec::new();
    for v in 0..n {
        if dsu.find(v) == keep_root {
            remap[v] = kept_labels.len() as u32;
            kept_labels.push(std::mem::take(&mut labels[v]));
        }
    }
    report.dropped_nodes = n - kept_labels.len();

    let mut links = Vec::with_capacity(raw.len());
    for (s, d, t) in raw {
        if remap[s] == u32::MAX {
            report.dropped_links += 1;
            continue;
        }
        links.push(Link {
            src: NodeId(remap[s]),
            dst: NodeId(remap[d]),
            traffic: t,
        });
    }
    Ok((NetworkGraph::assemble(kept_labels, links), report))
}

impl NetworkGraph {
    fn assemble(labels: Vec<String>, links: Vec<Link>) -> NetworkGraph {
        let n = labels.len();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        let mut by_pair = HashMap::with_capacity(links.len());
        for (i, l) in links.iter().enumerate() {
            let id = LinkId(i as u32);
            out[l.src.index()].push(id);
            inc[l.dst.index()].push(id);
            by_pair.insert((l.src.0, l.dst.0), id);
        }
        for list in &mut out {
            list.sort_by_key(|&e| (links[e.index()].dst, e));
        }
        for list in &mut inc {
            list.sort_by_key(|&e| (links[e.index()].src, e));
        }
        let reverse = links
            .iter()
            .map(|l| by_pair.get(&(l.dst.0, l.src.0)).copied())
            .collect();
        let by_label = labels
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), NodeId(i as u32)))
            .collect();
        NetworkGraph {
            labels,
            links,
            out,
            inc,
            reverse,
            by_pair,
            by_label,
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        (0..self.labels.len() as u32).map(NodeId)
    }

    pub fn link_ids(&self) -> impl ExactSizeIterator<Item = LinkId> + '_ {
        (0..self.links.len() as u32).map(LinkId)
    }

    /// The node with dense index `index`, if in range.
    pub fn node(&self, index: usize) -> Option<NodeId> {
        (index < self.labels.len()).then_some(NodeId(index as u32))
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.by_label.get(label).copied()
    }

    pub fn label(&self, node: NodeId) -> &str {
        &self.labels[node.index()]
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    #[inline]
    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.index()]
    }

    /// Out-links of `node`, ordered by destination id.
    #[inline]
    pub fn out_links(&self, node: NodeId) -> &[LinkId] {
        &self.out[node.index()]
    }

    /// In-links of `node`, ordered by source id.
    #[inline]
    pub fn in_links(&self, node: NodeId) -> &[LinkId] {
        &self.inc[node.index()]
    }

    /// The link running the opposite way, if the network has it.
    #[inline]
    pub fn reverse(&self, id: LinkId) -> Option<LinkId> {
        self.reverse[id.index()]
    }

    pub fn find_link(&self, src: NodeId, dst: NodeId) -> Option<LinkId> {
        self.by_pair.get(&(src.0, dst.0)).copied()
    }

    /// Links touching `node` in either direction.
    pub fn incident_links(&self, node: NodeId) -> impl Iterator<Item = LinkId> + '_ {
        self.out_links(node)
            .iter()
            .chain(self.in_links(node))
            .copied()
    }

    pub fn traffic(&self) -> Vec<f64> {
        self.links.iter().map(|l| l.traffic).collect()
    }

    pub fn total_traffic(&self) -> f64 {
        self.links.iter().map(|l| l.traffic).sum()
    }

    /// Copy of the graph with per-link traffic replaced.
    pub fn with_traffic(&self, traffic: &[f64]) -> Result<NetworkGraph, GraphError> {
        if traffic.len() != self.links.len() {
            return Err(GraphError::WeightCount {
                expected: self.links.len(),
                got: traffic.len(),
            });
        }
        let mut g = self.clone();
        for (i, (l, &t)) in g.links.iter_mut().zip(traffic).enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(GraphError::InvalidTraffic {
                    index: i,
                    traffic: t,
                });
            }
            l.traffic = t;
        }
        Ok(g)
    }

    /// True if every link has its reverse.
    pub fn is_symmetric(&self) -> bool {
        self.reverse.iter().all(Option::is_some)
    }

    /// Hop distances from `source` along directed links (`u32::MAX` when unreachable).
    pub fn bfs_distances(&self, source: NodeId) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.node_count()];
        let mut queue = VecDeque::new();
        dist[source.index()] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u.index()];
            for &e in self.out_links(u) {
                let v = self.links[e.index()].dst;
                if dist[v.index()] == u32::MAX {
                    dist[v.index()] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Longest finite shortest-path distance over all ordered pairs.
    pub fn diameter(&self) -> u32 {
        self.nodes()
            .map(|s| {
                self.bfs_distances(s)
                    .into_iter()
                    .filter(|&d| d != u32::MAX)
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    /// Mean shortest path length in nodes over reachable ordered pairs.
    pub fn mean_path_nodes(&self) -> f64 {
        let (mut sum, mut count) = (0u64, 0u64);
        for s in self.nodes() {
            for d in self.bfs_distances(s) {
                if d != u32::MAX && d > 0 {
                    sum += d as u64 + 1;
                    count += 1;
                }
            }
        }
        if count == 0 {
            0.0
        } else {
            sum as f64 / count as f64
        }
    }
}
