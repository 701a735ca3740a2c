//! Bit filters, link identifiers and the minimum-filter-length metric.

mod filter;
mod ids;
mod lps;

use thiserror::Error;

pub use filter::{bf_member, bf_or, BitFilter};
pub use ids::{expected_fpr, gen_random_ids, one_bit_ids_for, IdMode, LinkIdAssignment};
pub use lps::{min_filter_length, success_fraction, KRule, MAX_FILTER_BITS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BloomError {
    #[error("filter lengths differ: {expected} vs {got} bits")]
    MixedLength { expected: usize, got: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no filter of at most {max} bits reaches success fraction {p}")]
    Unsatisfiable { max: usize, p: f64 },
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
}
