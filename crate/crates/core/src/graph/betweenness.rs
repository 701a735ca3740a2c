use std::collections::VecDeque;

use crate::exec::Execution;

use super::{NetworkGraph, NodeId};

/// Directed edge betweenness: for each link, the fraction of ordered node pairs `(s, t)` whose
/// shortest paths run over it, with ties split evenly across equal-length paths. Normalised by
/// `n * (n - 1)`.
///
/// Brandes' accumulation over every source; sources are processed in fixed-size chunks so the
/// floating-point sum is the same for any [`Execution`].
pub fn betweenness_weights(g: &NetworkGraph, exec: Execution) -> Vec<f64> {
    let n = g.node_count();
    let m = g.link_count();
    let mut total = exec.chunked_fold(
        n,
        32,
        || vec![0.0f64; m],
        |acc, s| accumulate_source(g, NodeId(s as u32), acc),
        |acc, part| {
            for (a, p) in acc.iter_mut().zip(part) {
                *a += p;
            }
        },
    );
    let pairs = (n * n.saturating_sub(1)) as f64;
    if pairs > 0.0 {
        for b in &mut total {
            *b /= pairs;
        }
    }
    total
}

fn accumulate_source(g: &NetworkGraph, s: NodeId, acc: &mut [f64]) {
    let n = g.node_count();
    let mut dist = vec![u32::MAX; n];
    let mut sigma = vec![0.0f64; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    dist[s.index()] = 0;
    sigma[s.index()] = 1.0;
    queue.push_back(s);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &e in g.out_links(u) {
            let v = g.link(e).dst;
            if dist[v.index()] == u32::MAX {
                dist[v.index()] = dist[u.index()] + 1;
                queue.push_back(v);
            }
            if dist[v.index()] == dist[u.index()] + 1 {
                sigma[v.index()] += sigma[u.index()];
            }
        }
    }
    let mut delta = vec![0.0f64; n];
    for &w in order.iter().rev() {
        let dw = dist[w.index()];
        for &e in g.in_links(w) {
            let v = g.link(e).src;
            if dist[v.index()] != u32::MAX && dist[v.index()] + 1 == dw {
                let c = sigma[v.index()] / sigma[w.index()] * (1.0 + delta[w.index()]);
                acc[e.index()] += c;
                delta[v.index()] += c;
            }
        }
    }
}
