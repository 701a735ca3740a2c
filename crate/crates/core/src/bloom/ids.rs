use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::graph::LinkId;
use crate::partition::Partitioning;
use crate::rng;

use super::{BitFilter, BloomError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdMode {
    /// `k` independently chosen distinct bits per link; links may collide.
    RandomK,
    /// One bit per link, unique within the link's partition.
    OneBit,
}

/// Link identifiers of one scheme.
///
/// Random identifiers are derived lazily from `(seed, link)`, so a 2^20-bit scheme over a large
/// graph costs nothing until a link is actually tested.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkIdAssignment {
    mode: IdMode,
    m: usize,
    k: usize,
    link_count: usize,
    seed: u64,
    bits: Vec<u32>,
}

/// `link_count` random identifiers of `k` distinct bits out of `m`.
pub fn gen_random_ids(
    link_count: usize,
    m: usize,
    k: usize,
    seed: u64,
) -> Result<LinkIdAssignment, BloomError> {
    if m == 0 || k == 0 || k > m {
        return Err(BloomError::InvalidParams(format!(
            "need 1 <= k <= m, got k={k} m={m}"
        )));
    }
    Ok(LinkIdAssignment {
        mode: IdMode::RandomK,
        m,
        k,
        link_count,
        seed,
        bits: Vec::new(),
    })
}

/// The one-bit identifiers of a partitioning: `m` = partition size cap, bit = the link's rank
/// within its partition.
pub fn one_bit_ids_for(parts: &Partitioning) -> LinkIdAssignment {
    let n = parts.link_count();
    LinkIdAssignment {
        mode: IdMode::OneBit,
        m: parts.max_partition_size(),
        k: 1,
        link_count: n,
        seed: 0,
        bits: (0..n as u32).map(|l| parts.bit_of(LinkId(l))).collect(),
    }
}

impl LinkIdAssignment {
    pub fn mode(&self) -> IdMode {
        self.mode
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn link_count(&self) -> usize {
        self.link_count
    }

    /// Set bit positions of `link`'s identifier, ascending.
    pub fn positions(&self, link: LinkId) -> Vec<usize> {
        assert!(link.index() < self.link_count, "{link} has no identifier");
        match self.mode {
            IdMode::OneBit => vec![self.bits[link.index()] as usize],
            IdMode::RandomK => {
                let mut r = rng::stream(self.seed, &[link.0 as u64]);
                let mut p = index::sample(&mut r, self.m, self.k).into_vec();
                p.sort_unstable();
                p
            }
        }
    }

    pub fn id(&self, link: LinkId) -> BitFilter {
        BitFilter::from_positions(self.m, self.positions(link))
    }

    /// `bf_member(f, id(link))` without materialising the identifier.
    pub fn is_member(&self, f: &BitFilter, link: LinkId) -> Result<bool, BloomError> {
        if f.len() != self.m {
            return Err(BloomError::MixedLength {
                expected: self.m,
                got: f.len(),
            });
        }
        Ok(match self.mode {
            IdMode::OneBit => f.get(self.bits[link.index()] as usize),
            IdMode::RandomK => self.positions(link).into_iter().all(|p| f.get(p)),
        })
    }

    /// OR of the identifiers of `links`.
    pub fn filter_of(&self, links: &[LinkId]) -> BitFilter {
        let mut f = BitFilter::new(self.m);
        for &l in links {
            for p in self.positions(l) {
                f.set(p);
            }
        }
        f
    }
}

/// Standard Bloom false-positive approximation `(1 - e^{-kn/m})^k` after `n` insertions.
pub fn expected_fpr(m: usize, k: usize, n: usize) -> f64 {
    (1.0 - (-(k as f64) * n as f64 / m as f64).exp()).powi(k as i32)
}
