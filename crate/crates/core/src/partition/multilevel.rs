//! Multilevel k-way vertex partitioning minimising communication volume.
//!
//! The cost of an assignment `p` over a directed graph with vertex weights `τ` is
//!
//! ```text
//! totalv = Σ_v τ_v · |{p_u : v -> u} \ {p_v}|
//! ```
//!
//! i.e. every vertex pays its weight once per foreign partition among its successors. The scheme:
//!
//! 1. coarsen by structural matching until the graph is small relative to `k`;
//! 2. grow `k` regions greedily on the coarsest graph (a few seeded tries, best kept; small
//!    graphs also try random balanced starts);
//! 3. project back level by level, refining with boundary moves that strictly lower the cost
//!    while keeping every partition within `cap` links and non-empty; pairwise swaps take over
//!    when every partition is full.
//!
//! A coarse vertex stands for all its members, so the cost evaluated on a coarse graph bounds
//! the cost of the projected fine assignment from above.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::Serialize;

use crate::graph::ConnectivityGraph;
use crate::rng;

use super::PartitionError;

const UNASSIGNED: u32 = u32::MAX;
/// Grow-and-refine attempts on the coarsest level; small levels get more since each is cheap.
const INITIAL_TRIES: usize = 8;
const SMALL_LEVEL: usize = 64;
const SMALL_LEVEL_TRIES: usize = 64;
const MAX_PASSES: usize = 64;

/// Counters from one [`vertex_partition_with_stats`] run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VertexPartitionStats {
    /// Graph sizes from finest to coarsest.
    pub level_sizes: Vec<usize>,
    /// Cost of the grown initial partition, measured on the coarsest graph. Projection to finer
    /// levels can only lower it, so it bounds the final cost from above.
    pub initial_totalv: f64,
    pub final_totalv: f64,
    pub moves: usize,
    pub swaps: usize,
}

/// Partitions the connectivity graph into at most `k` parts of at most `cap` links each.
/// Returns one partition id per connectivity vertex.
pub fn vertex_partition(
    cg: &ConnectivityGraph,
    k: usize,
    cap: usize,
    seed: u64,
) -> Result<Vec<u32>, PartitionError> {
    vertex_partition_with_stats(cg, k, cap, seed).map(|(a, _)| a)
}

pub fn vertex_partition_with_stats(
    cg: &ConnectivityGraph,
    k: usize,
    cap: usize,
    seed: u64,
) -> Result<(Vec<u32>, VertexPartitionStats), PartitionError> {
    let total = cg.total_multiplicity();
    if k == 0 || cap == 0 || k.saturating_mul(cap) < total || cg.max_multiplicity() > cap {
        return Err(PartitionError::Infeasible { k, cap, total });
    }
    let finest = Level::from_connectivity(cg);
    let mut stats = VertexPartitionStats::default();
    if k == 1 || finest.len() <= 1 {
        stats.level_sizes.push(finest.len());
        return Ok((vec![0; finest.len()], stats));
    }

    // coarsening
    let coarsen_to = (30 * k).max(64);
    let max_vertex = ((1.5 * total as f64 / coarsen_to as f64) as usize).clamp(1, cap);
    let mut levels = vec![finest];
    let mut maps: Vec<Vec<u32>> = Vec::new();
    let mut r = rng::stream(seed, &[0xC0A5]);
    loop {
        let cur = levels.last().expect("at least the finest level");
        if cur.len() <= coarsen_to {
            break;
        }
        let (map, coarse) = cur.coarsen(max_vertex, &mut r);
        if coarse.len() as f64 > 0.95 * cur.len() as f64 {
            break;
        }
        maps.push(map);
        levels.push(coarse);
    }
    stats.level_sizes = levels.iter().map(Level::len).collect();

    // initial partition on the coarsest level
    let coarsest = levels.last().expect("non-empty");
    let target = total.div_ceil(k).min(cap);
    let mut best: Option<((usize, f64), f64, Vec<u32>)> = None;
    let tries = if coarsest.len() <= SMALL_LEVEL {
        SMALL_LEVEL_TRIES
    } else {
        INITIAL_TRIES
    };
    for t in 0..tries {
        let mut tr = rng::stream(seed, &[0x6A0, t as u64]);
        let start = if tries == SMALL_LEVEL_TRIES && t % 2 == 1 {
            coarsest.random_fill(k, cap, &mut tr)
        } else {
            coarsest.grow(k, target, cap, &mut tr)
        };
        let Some(mut a) = start else {
            continue;
        };
        let grown = coarsest.totalv(&a);
        let mut rf = Refiner::new(coarsest, &mut a, k);
        rf.run(coarsest, &mut a, cap);
        // an empty partition is worse than any cost
        let mut used = vec![false; k];
        a.iter().for_each(|&p| used[p as usize] = true);
        let cost = (used.iter().filter(|&&u| !u).count(), coarsest.totalv(&a));
        if best.as_ref().is_none_or(|(c, _, _)| cost < *c) {
            best = Some((cost, grown, a));
        }
    }
    let (_, grown, mut assignment) = best.ok_or(PartitionError::Infeasible { k, cap, total })?;
    stats.initial_totalv = grown;

    // uncoarsening with refinement
    for lvl in (0..maps.len()).rev() {
        let map = &maps[lvl];
        assignment = map.iter().map(|&c| assignment[c as usize]).collect();
        let level = &levels[lvl];
        let mut rf = Refiner::new(level, &mut assignment, k);
        let (m, s) = rf.run(level, &mut assignment, cap);
        stats.moves += m;
        stats.swaps += s;
    }
    stats.final_totalv = levels[0].totalv(&assignment);
    Ok((assignment, stats))
}

/// One level of the hierarchy.
#[derive(Debug, Clone)]
struct Level {
    weight: Vec<f64>,
    mult: Vec<usize>,
    out: Vec<Vec<u32>>,
    inc: Vec<Vec<u32>>,
}

impl Level {
    fn from_connectivity(cg: &ConnectivityGraph) -> Level {
        let n = cg.vertex_count();
        Level {
            weight: cg.vertices().iter().map(|v| v.weight).collect(),
            mult: cg.vertices().iter().map(|v| v.multiplicity()).collect(),
            out: (0..n).map(|v| cg.out_neighbors(v).to_vec()).collect(),
            inc: (0..n).map(|v| cg.in_neighbors(v).to_vec()).collect(),
        }
    }

    fn len(&self) -> usize {
        self.weight.len()
    }

    fn totalv(&self, part: &[u32]) -> f64 {
        let mut seen: Vec<u32> = Vec::new();
        let mut total = 0.0;
        for v in 0..self.len() {
            seen.clear();
            for &u in &self.out[v] {
                let p = part[u as usize];
                if p != part[v] && !seen.contains(&p) {
                    seen.push(p);
                }
            }
            total += self.weight[v] * seen.len() as f64;
        }
        total
    }

    /// Weighted neighbours of `v` (both directions), ascending by id. The weight of `{u, v}` is
    /// the volume that merging them would save: `τ_u` if `u -> v`, plus `τ_v` if `v -> u`.
    fn neighbours(&self, v: usize, buf: &mut Vec<(u32, f64)>) {
        buf.clear();
        let (out, inc) = (&self.out[v], &self.inc[v]);
        let (mut i, mut j) = (0, 0);
        while i < out.len() || j < inc.len() {
            let a = out.get(i).copied().unwrap_or(u32::MAX);
            let b = inc.get(j).copied().unwrap_or(u32::MAX);
            match a.cmp(&b) {
                Ordering::Less => {
                    buf.push((a, self.weight[v]));
                    i += 1;
                }
                Ordering::Greater => {
                    buf.push((b, self.weight[b as usize]));
                    j += 1;
                }
                Ordering::Equal => {
                    buf.push((a, self.weight[v] + self.weight[a as usize]));
                    i += 1;
                    j += 1;
                }
            }
        }
    }

    /// 2 if `u` and `v` point at each other, 1 if one points at the other.
    fn directions(&self, v: usize, u: usize) -> u8 {
        let u = u as u32;
        self.out[v].binary_search(&u).is_ok() as u8 + self.inc[v].binary_search(&u).is_ok() as u8
    }

    /// Matching by edge structure; returns the fine-to-coarse map and the coarse level.
    fn coarsen(&self, max_vertex: usize, r: &mut rng::Rng) -> (Vec<u32>, Level) {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(r);
        let mut mate = vec![UNASSIGNED; n];
        let mut buf = Vec::new();
        for &v in &order {
            if mate[v] != UNASSIGNED {
                continue;
            }
            self.neighbours(v, &mut buf);
            // matching ignores traffic: mutual neighbours first, then the lighter partner, then
            // the lowest id
            let mut pick: Option<(u32, (u8, std::cmp::Reverse<usize>))> = None;
            for &(u, _) in &buf {
                let ui = u as usize;
                if mate[ui] != UNASSIGNED || self.mult[v] + self.mult[ui] > max_vertex {
                    continue;
                }
                let score = (self.directions(v, ui), std::cmp::Reverse(self.mult[ui]));
                if pick.is_none_or(|(_, best)| score > best) {
                    pick = Some((u, score));
                }
            }
            match pick {
                Some((u, _)) => {
                    mate[v] = u;
                    mate[u as usize] = v as u32;
                }
                None => mate[v] = v as u32,
            }
        }
        let mut map = vec![UNASSIGNED; n];
        let mut count = 0u32;
        for v in 0..n {
            if map[v] == UNASSIGNED {
                map[v] = count;
                map[mate[v] as usize] = count;
                count += 1;
            }
        }
        let c = count as usize;
        let mut weight = vec![0.0; c];
        let mut mult = vec![0; c];
        let mut out = vec![Vec::new(); c];
        let mut inc = vec![Vec::new(); c];
        for v in 0..n {
            let cv = map[v] as usize;
            weight[cv] += self.weight[v];
            mult[cv] += self.mult[v];
            for &u in &self.out[v] {
                let cu = map[u as usize];
                if cu as usize != cv {
                    out[cv].push(cu);
                    inc[cu as usize].push(cv as u32);
                }
            }
        }
        for list in out.iter_mut().chain(inc.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        (
            map,
            Level {
                weight,
                mult,
                out,
                inc,
            },
        )
    }

    /// Random balanced start: vertices in random order (largest multiplicity first), each to the
    /// least-loaded partition with room.
    fn random_fill(&self, k: usize, cap: usize, r: &mut rng::Rng) -> Option<Vec<u32>> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(r);
        order.sort_by_key(|&v| std::cmp::Reverse(self.mult[v]));
        let mut load = vec![0usize; k];
        let mut part = vec![UNASSIGNED; self.len()];
        for v in order {
            let p = (0..k)
                .filter(|&p| load[p] + self.mult[v] <= cap)
                .min_by_key(|&p| (load[p], p))?;
            load[p] += self.mult[v];
            part[v] = p as u32;
        }
        Some(part)
    }

    /// Greedy region growing. Regions `0..k-1` are grown to `target` links from a seeded start,
    /// always absorbing the frontier vertex most strongly tied to the region (lowest id on ties);
    /// the last region takes the rest. Returns `None` if the leftovers cannot be packed.
    fn grow(&self, k: usize, target: usize, cap: usize, r: &mut rng::Rng) -> Option<Vec<u32>> {
        let n = self.len();
        let mut part = vec![UNASSIGNED; n];
        let mut load = vec![0usize; k];
        let mut unassigned = n;
        let mut gain = vec![0.0f64; n];
        let mut in_frontier = vec![false; n];
        let mut skipped = vec![false; n];
        let mut buf = Vec::new();
        for p in 0..k.saturating_sub(1) {
            if unassigned == 0 {
                break;
            }
            let mut heap: BinaryHeap<Frontier> = BinaryHeap::new();
            let mut touched: Vec<usize> = Vec::new();
            while load[p] < target {
                let next = loop {
                    match heap.pop() {
                        Some(f) if part[f.v] != UNASSIGNED || f.gain != gain[f.v] => continue,
                        Some(f) if load[p] + self.mult[f.v] > target => {
                            skipped[f.v] = true;
                            touched.push(f.v);
                            continue;
                        }
                        other => break other.map(|f| f.v),
                    }
                };
                let v = match next {
                    Some(v) => v,
                    None => {
                        // frontier exhausted: restart from a random vertex that still fits
                        let candidates: Vec<usize> = (0..n)
                            .filter(|&v| {
                                part[v] == UNASSIGNED
                                    && load[p] + self.mult[v] <= target
                                    && !skipped[v]
                            })
                            .collect();
                        if candidates.is_empty() {
                            break;
                        }
                        candidates[r.gen_range(0..candidates.len())]
                    }
                };
                part[v] = p as u32;
                load[p] += self.mult[v];
                unassigned -= 1;
                self.neighbours(v, &mut buf);
                for &(u, w) in &buf {
                    let u = u as usize;
                    if part[u] == UNASSIGNED && !skipped[u] {
                        if !in_frontier[u] {
                            in_frontier[u] = true;
                            touched.push(u);
                        }
                        gain[u] += w;
                        heap.push(Frontier {
                            gain: gain[u],
                            v: u,
                        });
                    }
                }
            }
            for u in touched {
                gain[u] = 0.0;
                in_frontier[u] = false;
                skipped[u] = false;
            }
        }
        let last = k - 1;
        for v in 0..n {
            if part[v] == UNASSIGNED {
                part[v] = last as u32;
                load[last] += self.mult[v];
            }
        }
        if load[last] > cap {
            // move leftovers, largest first, into the least-loaded partition that fits
            let mut extra: Vec<usize> = (0..n).filter(|&v| part[v] == last as u32).collect();
            extra.sort_by_key(|&v| (std::cmp::Reverse(self.mult[v]), v));
            for v in extra {
                if load[last] <= cap {
                    break;
                }
                let dest = (0..last)
                    .filter(|&q| load[q] + self.mult[v] <= cap)
                    .min_by_key(|&q| (load[q], q))?;
                part[v] = dest as u32;
                load[last] -= self.mult[v];
                load[dest] += self.mult[v];
            }
        }
        Some(part)
    }
}

#[derive(Debug, Clone, Copy)]
struct Frontier {
    gain: f64,
    v: usize,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.v.cmp(&self.v))
    }
}

/// Per-vertex multiset of successor partitions plus partition loads.
struct Refiner {
    counts: Vec<Vec<(u32, u32)>>,
    load: Vec<usize>,
}

impl Refiner {
    fn new(level: &Level, part: &mut [u32], k: usize) -> Refiner {
        let mut load = vec![0usize; k];
        for v in 0..level.len() {
            load[part[v] as usize] += level.mult[v];
        }
        let counts = (0..level.len())
            .map(|v| {
                let mut c: Vec<(u32, u32)> = Vec::new();
                for &u in &level.out[v] {
                    bump(&mut c, part[u as usize], 1);
                }
                c
            })
            .collect();
        Refiner { counts, load }
    }

    fn count(&self, v: usize, p: u32) -> u32 {
        self.counts[v]
            .iter()
            .find(|(q, _)| *q == p)
            .map_or(0, |&(_, c)| c)
    }

    /// Cost change of moving `v` from its partition to `to`, and the magnitude of the terms
    /// involved (for a relative tolerance).
    fn delta(&self, level: &Level, part: &[u32], v: usize, to: u32) -> (f64, f64) {
        let from = part[v];
        let own = self.count(v, from) > 0;
        let new = self.count(v, to) > 0;
        let mut d = level.weight[v] * (own as i32 - new as i32) as f64;
        let mut scale = level.weight[v];
        for &u in &level.inc[v] {
            let u = u as usize;
            let pu = part[u];
            let mut change = 0i32;
            if from != pu && self.count(u, from) == 1 {
                change -= 1;
            }
            if to != pu && self.count(u, to) == 0 {
                change += 1;
            }
            if change != 0 {
                d += level.weight[u] * change as f64;
                scale += level.weight[u];
            }
        }
        (d, scale)
    }

    fn apply(&mut self, level: &Level, part: &mut [u32], v: usize, to: u32) {
        let from = part[v];
        for &u in &level.inc[v] {
            let c = &mut self.counts[u as usize];
            bump(c, from, -1);
            bump(c, to, 1);
        }
        self.load[from as usize] -= level.mult[v];
        self.load[to as usize] += level.mult[v];
        part[v] = to;
    }

    fn candidates(level: &Level, part: &[u32], v: usize, buf: &mut Vec<u32>) {
        buf.clear();
        for &u in level.out[v].iter().chain(&level.inc[v]) {
            let p = part[u as usize];
            if p != part[v] && !buf.contains(&p) {
                buf.push(p);
            }
        }
        buf.sort_unstable();
    }

    /// Boundary moves until a full pass changes nothing, then swaps; repeats while either helps.
    fn run(&mut self, level: &Level, part: &mut [u32], cap: usize) -> (usize, usize) {
        let (mut moves, mut swaps) = (0, 0);
        for _ in 0..MAX_PASSES {
            let m = self.move_pass(level, part, cap);
            moves += m;
            if m > 0 {
                continue;
            }
            let s = self.swap_pass(level, part, cap);
            swaps += s;
            if s == 0 {
                break;
            }
        }
        (moves, swaps)
    }

    fn move_pass(&mut self, level: &Level, part: &mut [u32], cap: usize) -> usize {
        let mut moved = 0;
        let mut cand = Vec::new();
        for v in 0..level.len() {
            // never empty a partition: the partition count is part of the contract
            if self.load[part[v] as usize] == level.mult[v] {
                continue;
            }
            Self::candidates(level, part, v, &mut cand);
            let mut best: Option<(f64, u32)> = None;
            for &q in &cand {
                if self.load[q as usize] + level.mult[v] > cap {
                    continue;
                }
                let (d, scale) = self.delta(level, part, v, q);
                if d < -1e-12 * scale.max(1.0) && best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, q));
                }
            }
            if let Some((_, q)) = best {
                self.apply(level, part, v, q);
                moved += 1;
            }
        }
        moved
    }

    fn swap_pass(&mut self, level: &Level, part: &mut [u32], cap: usize) -> usize {
        let n = level.len();
        let small = n <= 64;
        let mut swapped = 0;
        let mut cand = Vec::new();
        for v in 0..n {
            Self::candidates(level, part, v, &mut cand);
            let a = part[v];
            'targets: for &q in &cand {
                let pool: Vec<usize> = if small {
                    (0..n).filter(|&u| part[u] == q).collect()
                } else {
                    level.out[v]
                        .iter()
                        .chain(&level.inc[v])
                        .map(|&u| u as usize)
                        .filter(|&u| part[u] == q)
                        .collect()
                };
                for u in pool {
                    let (mv, mu) = (level.mult[v], level.mult[u]);
                    if self.load[a as usize] - mv + mu > cap
                        || self.load[q as usize] - mu + mv > cap
                    {
                        continue;
                    }
                    let (d1, s1) = self.delta(level, part, v, q);
                    self.apply(level, part, v, q);
                    let (d2, s2) = self.delta(level, part, u, a);
                    if d1 + d2 < -1e-12 * (s1 + s2).max(1.0) {
                        self.apply(level, part, u, a);
                        swapped += 1;
                        break 'targets;
                    }
                    self.apply(level, part, v, a);
                }
            }
        }
        swapped
    }
}

fn bump(c: &mut Vec<(u32, u32)>, p: u32, by: i32) {
    if let Some(i) = c.iter().position(|(q, _)| *q == p) {
        let n = c[i].1 as i32 + by;
        debug_assert!(n >= 0);
        if n == 0 {
            c.swap_remove(i);
        } else {
            c[i].1 = n as u32;
        }
    } else {
        debug_assert!(by > 0);
        c.push((p, by as u32));
    }
}
