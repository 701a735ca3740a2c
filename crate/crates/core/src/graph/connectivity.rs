use serde::Serialize;

use super::{GraphError, LinkId, NetworkGraph, NodeId};

/// A connectivity-graph vertex: one directed network link, or several merged around a legacy
/// switch. `links.len()` is the vertex's multiplicity for partition size accounting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CgVertex {
    pub links: Vec<LinkId>,
    pub weight: f64,
}

impl CgVertex {
    #[inline]
    pub fn multiplicity(&self) -> usize {
        self.links.len()
    }
}

/// Link-adjacency graph: an edge `u -> v` means a packet leaving over `u` may continue over `v`.
#[derive(Debug, Clone)]
pub struct ConnectivityGraph {
    vertices: Vec<CgVertex>,
    out: Vec<Vec<u32>>,
    inc: Vec<Vec<u32>>,
    vertex_of: Vec<u32>,
}

/// Connectivity graph weighted by the links' own traffic.
pub fn build_connectivity_graph(g: &NetworkGraph) -> ConnectivityGraph {
    ConnectivityGraph::from_network(g, &g.traffic())
        .expect("traffic vector always matches the link count")
}

impl ConnectivityGraph {
    /// One vertex per link with `weights[link]`; `(a,b) -> (b,c)` for every `c != a`.
    pub fn from_network(g: &NetworkGraph, weights: &[f64]) -> Result<Self, GraphError> {
        if weights.len() != g.link_count() {
            return Err(GraphError::WeightCount {
                expected: g.link_count(),
                got: weights.len(),
            });
        }
        let vertices = g
            .link_ids()
            .map(|e| CgVertex {
                links: vec![e],
                weight: weights[e.index()],
            })
            .collect();
        let mut out = vec![Vec::new(); g.link_count()];
        let mut inc = vec![Vec::new(); g.link_count()];
        for e in g.link_ids() {
            let link = g.link(e);
            for &f in g.out_links(link.dst) {
                if g.link(f).dst != link.src {
                    out[e.index()].push(f.0);
                    inc[f.index()].push(e.0);
                }
            }
        }
        for list in out.iter_mut().chain(inc.iter_mut()) {
            list.sort_unstable();
        }
        Ok(ConnectivityGraph {
            vertices,
            out,
            inc,
            vertex_of: (0..g.link_count() as u32).collect(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn vertices(&self) -> &[CgVertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &CgVertex {
        &self.vertices[v]
    }

    /// Successors of `v`, ascending.
    pub fn out_neighbors(&self, v: usize) -> &[u32] {
        &self.out[v]
    }

    /// Predecessors of `v`, ascending.
    pub fn in_neighbors(&self, v: usize) -> &[u32] {
        &self.inc[v]
    }

    /// The vertex holding network link `link`.
    pub fn vertex_of(&self, link: LinkId) -> usize {
        self.vertex_of[link.index()] as usize
    }

    pub fn link_count(&self) -> usize {
        self.vertex_of.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v as usize)))
    }

    pub fn total_weight(&self) -> f64 {
        self.vertices.iter().map(|v| v.weight).sum()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.vertices.iter().map(CgVertex::multiplicity).sum()
    }

    pub fn max_multiplicity(&self) -> usize {
        self.vertices
            .iter()
            .map(CgVertex::multiplicity)
            .max()
            .unwrap_or(0)
    }
}

/// Merges, for every legacy switch, all vertices whose links touch it into one super-vertex,
/// so a partitioner can never split a legacy switch's links across partitions.
///
/// Merging is transitive: two legacy switches joined by a link end up in one super-vertex.
/// With `cap` set, a super-vertex with more than `cap` links is rejected as unpartitionable.
pub fn collapse_legacy(
    cg: &ConnectivityGraph,
    g: &NetworkGraph,
    legacy: &[NodeId],
    cap: Option<usize>,
) -> Result<ConnectivityGraph, GraphError> {
    if cg.link_count() != g.link_count() {
        return Err(GraphError::WeightCount {
            expected: g.link_count(),
            got: cg.link_count(),
        });
    }
    for &n in legacy {
        if n.index() >= g.node_count() {
            return Err(GraphError::UnknownNode(n));
        }
    }
    let nv = cg.vertex_count();
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &node in legacy {
        let mut first: Option<usize> = None;
        for e in g.incident_links(node) {
            let v = find(&mut parent, cg.vertex_of(e));
            match first {
                None => first = Some(v),
                Some(r) => {
                    let r = find(&mut parent, r);
                    if r != v {
                        // keep the smaller index as root so new vertex order is stable
                        let (lo, hi) = if r < v { (r, v) } else { (v, r) };
                        parent[hi] = lo;
                    }
                }
            }
        }
    }

    let mut new_index = vec![u32::MAX; nv];
    let mut vertices: Vec<CgVertex> = Vec::new();
    for v in 0..nv {
        let r = find(&mut parent, v);
        if new_index[r] == u32::MAX {
            new_index[r] = vertices.len() as u32;
            vertices.push(CgVertex {
                links: Vec::new(),
                weight: 0.0,
            });
        }
        let idx = new_index[r] as usize;
        new_index[v] = new_index[r];
        let src = &cg.vertices[v];
        vertices[idx].links.extend_from_slice(&src.links);
        vertices[idx].weight += src.weight;
    }
    for v in &mut vertices {
        v.links.sort_unstable();
    }
    if let Some(cap) = cap {
        if let Some((i, v)) = vertices
            .iter()
            .enumerate()
            .find(|(_, v)| v.multiplicity() > cap)
        {
            let node = legacy
                .iter()
                .copied()
                .find(|&n| g.incident_links(n).any(|e| v.links.contains(&e)))
                .expect("oversized super-vertex stems from a legacy switch");
            return Err(GraphError::Unpartitionable {
                node,
                vertex: i,
                size: v.multiplicity(),
                cap,
            });
        }
    }

    let mut out = vec![Vec::new(); vertices.len()];
    let mut inc = vec![Vec::new(); vertices.len()];
    for (u, v) in cg.edges() {
        let (a, b) = (new_index[u], new_index[v]);
        if a != b {
            out[a as usize].push(b);
            inc[b as usize].push(a);
        }
    }
    for list in out.iter_mut().chain(inc.iter_mut()) {
        list.sort_unstable();
        list.dedup();
    }
    let mut vertex_of = vec![0u32; cg.link_count()];
    for (i, v) in vertices.iter().enumerate() {
        for &l in &v.links {
            vertex_of[l.index()] = i as u32;
        }
    }
    Ok(ConnectivityGraph {
        vertices,
        out,
        inc,
        vertex_of,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_network_graph;

    fn triangle() -> NetworkGraph {
        let e = [
            ("v2", "v3"),
            ("v3", "v4"),
            ("v4", "v2"),
            ("v2", "v4"),
            ("v4", "v3"),
            ("v3", "v2"),
        ];
        build_network_graph(e.iter().map(|&(a, b)| (a, b, 1.0)))
            .unwrap()
            .0
    }

    #[test]
    fn triangle_splits_into_two_directed_cycles() {
        let g = triangle();
        let cg = build_connectivity_graph(&g);
        assert_eq!(cg.vertex_count(), 6);
        let id = |a: &str, b: &str| {
            g.find_link(g.node_by_label(a).unwrap(), g.node_by_label(b).unwrap())
                .unwrap()
                .0
        };
        let has = |u: u32, v: u32| cg.out_neighbors(u as usize).contains(&v);
        assert!(has(id("v2", "v3"), id("v3", "v4")));
        assert!(has(id("v3", "v4"), id("v4", "v2")));
        assert!(has(id("v4", "v2"), id("v2", "v3")));
        assert!(has(id("v2", "v4"), id("v4", "v3")));
        assert!(has(id("v4", "v3"), id("v3", "v2")));
        assert!(has(id("v3", "v2"), id("v2", "v4")));
        // In a triangle every vertex has exactly one successor: the two cycles are disjoint.
        assert_eq!(cg.edge_count(), 6);
    }

    #[test]
    fn single_link() {
        let (g, _) = build_network_graph([("a", "b", 2.0)]).unwrap();
        let cg = build_connectivity_graph(&g);
        assert_eq!(cg.vertex_count(), 1);
        assert_eq!(cg.edge_count(), 0);
        assert_eq!(cg.total_weight(), 2.0);
    }

    #[test]
    fn directed_cycle() {
        let (g, _) =
            build_network_graph([("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)]).unwrap();
        let cg = build_connectivity_graph(&g);
        assert_eq!(cg.vertex_count(), 3);
        let edges: Vec<_> = cg.edges().collect();
        assert_eq!(edges, vec![(0, 1), (1, 2), (2, 0)]);
    }

    #[test]
    fn no_reverse_edges() {
        let g = triangle();
        let cg = build_connectivity_graph(&g);
        for (u, v) in cg.edges() {
            assert_ne!(g.reverse(LinkId(u as u32)), Some(LinkId(v as u32)));
        }
    }

    #[test]
    fn collapse_empty_is_identity() {
        let g = triangle();
        let cg = build_connectivity_graph(&g);
        let c = collapse_legacy(&cg, &g, &[], None).unwrap();
        assert_eq!(c.vertices(), cg.vertices());
        assert_eq!(
            c.edges().collect::<Vec<_>>(),
            cg.edges().collect::<Vec<_>>()
        );
    }

    #[test]
    fn collapse_counts_members_and_caps() {
        // v3 has four incident links (two neighbours, both directions)
        let e = [
            ("v1", "v3"),
            ("v3", "v1"),
            ("v3", "v4"),
            ("v4", "v3"),
            ("v1", "v2"),
            ("v2", "v1"),
        ];
        let (g, _) = build_network_graph(e.iter().map(|&(a, b)| (a, b, 2.0))).unwrap();
        let cg = build_connectivity_graph(&g);
        let v3 = g.node_by_label("v3").unwrap();
        let c = collapse_legacy(&cg, &g, &[v3], Some(4)).unwrap();
        assert_eq!(c.vertex_count(), 3);
        assert_eq!(c.max_multiplicity(), 4);
        assert_eq!(c.total_multiplicity(), 6);
        assert_eq!(c.total_weight(), cg.total_weight());
        assert!(c.edges().all(|(u, v)| u != v));
        let err = collapse_legacy(&cg, &g, &[v3], Some(3)).unwrap_err();
        assert!(matches!(
            err,
            GraphError::Unpartitionable {
                size: 4,
                cap: 3,
                ..
            }
        ));
    }

    #[test]
    fn collapse_is_transitive_across_shared_links() {
        let e = [
            ("a", "b"),
            ("b", "a"),
            ("b", "c"),
            ("c", "b"),
            ("c", "d"),
            ("d", "c"),
        ];
        let (g, _) = build_network_graph(e.iter().map(|&(a, b)| (a, b, 1.0))).unwrap();
        let cg = build_connectivity_graph(&g);
        let b = g.node_by_label("b").unwrap();
        let c = g.node_by_label("c").unwrap();
        let collapsed = collapse_legacy(&cg, &g, &[b, c], None).unwrap();
        // every link touches b or c
        assert_eq!(collapsed.vertex_count(), 1);
        assert_eq!(collapsed.vertex(0).multiplicity(), 6);
        assert_eq!(collapsed.edge_count(), 0);
    }
}
