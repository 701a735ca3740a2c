use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::graph::{NetworkGraph, NodeId};
use crate::rng;
use crate::sim::{build_multicast_tree, deliver_classical, sample_sinks, MulticastTree};

use super::{gen_random_ids, BloomError};

/// Upper end of the filter-length search.
pub const MAX_FILTER_BITS: usize = 1 << 20;

/// How many bits each random identifier sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRule {
    /// `round(m / n * ln 2)` for a tree of `n` links, at least 1 and at most `m`.
    #[default]
    OptimalPerTree,
    /// The same `k` for every tree (capped at `m`).
    Fixed(usize),
}

impl KRule {
    pub fn k(self, m: usize, tree_links: usize) -> usize {
        let k = match self {
            KRule::OptimalPerTree => {
                (m as f64 / tree_links.max(1) as f64 * std::f64::consts::LN_2).round() as usize
            }
            KRule::Fixed(k) => k,
        };
        k.clamp(1, m)
    }
}

/// Shared Monte Carlo sample: the trees do not depend on the filter length, so every candidate
/// length is evaluated on the same trees (common random numbers).
struct Sample {
    trees: Vec<MulticastTree>,
    ttl: usize,
    seed: u64,
}

impl Sample {
    fn draw(
        g: &NetworkGraph,
        s: usize,
        trials: usize,
        seed: u64,
        exec: Execution,
    ) -> Result<Sample, BloomError> {
        let n = g.node_count();
        if s == 0 || s >= n {
            return Err(BloomError::InvalidParams(format!(
                "sink count {s} must lie in 1..{n} for a {n}-node graph"
            )));
        }
        let trees = exec.try_map(trials, |t| {
            let mut r = rng::stream(seed, &[t as u64]);
            let source = NodeId(r.gen_range(0..n as u32));
            let sinks = sample_sinks(&mut r, n, source, s);
            build_multicast_tree(g, source, &sinks)
        })?;
        Ok(Sample {
            trees,
            ttl: 4 * g.diameter().max(1) as usize,
            seed,
        })
    }

    fn successes(
        &self,
        g: &NetworkGraph,
        m: usize,
        k_rule: KRule,
        exec: Execution,
    ) -> Result<usize, BloomError> {
        let ok = exec.try_map(self.trees.len(), |t| -> Result<bool, BloomError> {
            let tree = &self.trees[t];
            let k = k_rule.k(m, tree.links.len());
            let ids = gen_random_ids(
                g.link_count(),
                m,
                k,
                rng::derive_seed(self.seed, &[t as u64, 1]),
            )?;
            let f = ids.filter_of(&tree.links);
            let trace = deliver_classical(g, &ids, &f, tree, self.ttl)?;
            Ok(trace.false_firings.is_empty())
        })?;
        Ok(ok.into_iter().filter(|&b| b).count())
    }
}

/// Fraction of `trials` random `s`-sink trees delivered without any false firing by an `m`-bit
/// random-identifier filter.
#[allow(clippy::too_many_arguments)]
pub fn success_fraction(
    g: &NetworkGraph,
    s: usize,
    m: usize,
    k_rule: KRule,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<f64, BloomError> {
    if trials == 0 || m == 0 {
        return Err(BloomError::InvalidParams(
            "need trials >= 1 and m >= 1".into(),
        ));
    }
    let sample = Sample::draw(g, s, trials, seed, exec)?;
    Ok(sample.successes(g, m, k_rule, exec)? as f64 / trials as f64)
}

/// Smallest filter length `L_p(s)` keeping at least a fraction `p` of random `s`-sink trees free
/// of false firings.
///
/// Doubling search followed by bisection over `m`, all candidates sharing one tree sample.
pub fn min_filter_length(
    g: &NetworkGraph,
    s: usize,
    p: f64,
    k_rule: KRule,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<usize, BloomError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(BloomError::InvalidParams(format!(
            "p must lie in (0, 1), got {p}"
        )));
    }
    if trials < 100 {
        return Err(BloomError::InvalidParams(format!(
            "need at least 100 trials, got {trials}"
        )));
    }
    let sample = Sample::draw(g, s, trials, seed, exec)?;
    let need = (p * trials as f64).ceil() as usize;
    let passes = |m: usize| -> Result<bool, BloomError> {
        Ok(sample.successes(g, m, k_rule, exec)? >= need)
    };
    let mut hi = 1;
    while !passes(hi)? {
        if hi >= MAX_FILTER_BITS {
            return Err(BloomError::Unsatisfiable {
                max: MAX_FILTER_BITS,
                p,
            });
        }
        hi = (hi * 2).min(MAX_FILTER_BITS);
    }
    let mut lo = hi / 2; // fails, or 0
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    log::debug!("L_{p}({s}) = {hi} over {trials} trials");
    Ok(hi)
}
