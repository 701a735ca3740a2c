//! The XBF header: the active filter (iBF), a partition bitmap and the per-partition filters
//! (zBF), with a raw and a run-length-compressed wire format.
//!
//! Raw layout:
//!
//! ```text
//! 0x5B | 0x01 | |P| (u16 BE) | bitmap, ceil(|P|/8) bytes | iBF, m/8 bytes | zBF filters, m/8 bytes each
//! ```
//!
//! Bitmap bit `i` is `0x80 >> (i % 8)` of byte `i / 8`. Filters are stored LSB-first (see
//! [`BitFilter::to_bytes`]) in ascending partition order, so the offset of any filter follows from
//! the bitmap alone.
//!
//! The compressed variant sets the high bit of the version byte (`0x81`), stores `m` as a u16 BE
//! after the bitmap, keeps the iBF raw, and replaces the filters by the gamma-coded run lengths
//! of their concatenation, zero-padded to a byte boundary.

mod compress;
pub mod gamma;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bloom::BitFilter;
use crate::partition::{PartitionId, Partitioning};
use crate::sim::MulticastTree;

pub use compress::{compress_bits, compress_zbf, decompress_bits, decompress_zbf, CompressedZbf};
pub use gamma::{elias_gamma_decode, elias_gamma_encode, gamma_len, gamma_string};

pub const MAGIC: u8 = 0x5B;
pub const VERSION: u8 = 0x01;
/// Version-byte flag marking a compressed zBF.
pub const COMPRESSED_FLAG: u8 = 0x80;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeaderError {
    #[error("multicast tree has no links")]
    EmptyTree,
    #[error("link {0} is not assigned to a partition")]
    UnassignedLink(u32),
    #[error("entry partition {0} is not on the tree")]
    EntryNotOnTree(PartitionId),
    #[error("{0} partitions do not fit the 16-bit partition count")]
    TooManyPartitions(usize),
    #[error("filter length {0} is not a multiple of 8")]
    NotByteAligned(usize),
    #[error("invalid header: {0}")]
    Invalid(String),
    #[error("gamma code of 0 is undefined")]
    GammaZero,
    #[error("input ends early")]
    Truncated,
    #[error("malformed header: {0}")]
    Malformed(String),
}

/// In-packet XBF state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XbfHeader {
    pub ibf: BitFilter,
    /// One flag per partition of the network; set iff the partition has a zBF filter.
    pub bitmap: Vec<bool>,
    /// Filters of the partitions the tree crosses, ascending by partition id.
    pub zbf: Vec<(PartitionId, BitFilter)>,
}

impl XbfHeader {
    /// Assembles a header from an iBF, the network partition count and the zBF filters in any
    /// order.
    pub fn new(
        ibf: BitFilter,
        partition_count: usize,
        mut zbf: Vec<(PartitionId, BitFilter)>,
    ) -> Result<XbfHeader, HeaderError> {
        zbf.sort_by_key(|(p, _)| *p);
        let mut bitmap = vec![false; partition_count];
        for (p, _) in &zbf {
            if let Some(b) = bitmap.get_mut(*p as usize) {
                *b = true;
            }
        }
        let h = XbfHeader { ibf, bitmap, zbf };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<(), HeaderError> {
        let m = self.ibf.len();
        if self.bitmap.len() > u16::MAX as usize {
            return Err(HeaderError::TooManyPartitions(self.bitmap.len()));
        }
        for w in self.zbf.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(HeaderError::Invalid("zBF not strictly ascending".into()));
            }
        }
        for (p, f) in &self.zbf {
            if *p as usize >= self.bitmap.len() {
                return Err(HeaderError::Invalid(format!(
                    "partition {p} outside the bitmap"
                )));
            }
            if f.len() != m {
                return Err(HeaderError::Invalid(format!(
                    "partition {p} filter has {} bits, iBF has {m}",
                    f.len()
                )));
            }
        }
        if self.bitmap.iter().filter(|&&b| b).count() != self.zbf.len()
            || self.zbf.iter().any(|(p, _)| !self.bitmap[*p as usize])
        {
            return Err(HeaderError::Invalid("bitmap disagrees with the zBF".into()));
        }
        Ok(())
    }

    /// Filter length in bits.
    pub fn m(&self) -> usize {
        self.ibf.len()
    }

    pub fn partition_count(&self) -> usize {
        self.bitmap.len()
    }

    pub fn has_partition(&self, p: PartitionId) -> bool {
        self.bitmap.get(p as usize).copied().unwrap_or(false)
    }

    pub fn filter(&self, p: PartitionId) -> Option<&BitFilter> {
        self.zbf
            .binary_search_by_key(&p, |(q, _)| *q)
            .ok()
            .map(|i| &self.zbf[i].1)
    }

    pub fn partitions(&self) -> Vec<PartitionId> {
        self.zbf.iter().map(|(p, _)| *p).collect()
    }

    /// Overhead in bits without framing: iBF + bitmap + zBF.
    pub fn raw_bits(&self) -> usize {
        self.m() + self.bitmap.len() + self.zbf.len() * self.m()
    }

    /// Overhead in bits with the zBF compressed (iBF and bitmap stay raw).
    pub fn compressed_bits(&self) -> usize {
        self.m() + self.bitmap.len() + compress_zbf(self).bit_len
    }

    pub fn serialize(&self) -> Result<Vec<u8>, HeaderError> {
        self.validate()?;
        let mut out = self.prefix(VERSION)?;
        out.extend(self.ibf.to_bytes());
        for (_, f) in &self.zbf {
            out.extend(f.to_bytes());
        }
        Ok(out)
    }

    pub fn serialize_compressed(&self) -> Result<Vec<u8>, HeaderError> {
        self.validate()?;
        let m = u16::try_from(self.m())
            .map_err(|_| HeaderError::Invalid(format!("m = {} does not fit u16", self.m())))?;
        let mut out = self.prefix(VERSION | COMPRESSED_FLAG)?;
        out.extend(m.to_be_bytes());
        out.extend(self.ibf.to_bytes());
        out.extend(compress_zbf(self).bit_stream);
        Ok(out)
    }

    /// The shorter of the two encodings; raw on ties.
    pub fn serialize_auto(&self) -> Result<Vec<u8>, HeaderError> {
        let raw = self.serialize()?;
        match self.serialize_compressed() {
            Ok(c) if c.len() < raw.len() => Ok(c),
            _ => Ok(raw),
        }
    }

    fn prefix(&self, version: u8) -> Result<Vec<u8>, HeaderError> {
        if !self.m().is_multiple_of(8) {
            return Err(HeaderError::NotByteAligned(self.m()));
        }
        let p = self.bitmap.len();
        let mut out = vec![MAGIC, version];
        out.extend((p as u16).to_be_bytes());
        out.extend(encode_bitmap(&self.bitmap));
        Ok(out)
    }

    pub fn deserialize(bytes: &[u8]) -> Result<XbfHeader, HeaderError> {
        let (version, bitmap, body) = split_prefix(bytes)?;
        let count = bitmap.iter().filter(|&&b| b).count();
        let present: Vec<PartitionId> = present(&bitmap);
        let (ibf, zbf) = if version == VERSION {
            if body.is_empty() || body.len() % (count + 1) != 0 {
                return Err(HeaderError::Malformed(format!(
                    "{} filter bytes do not split into {} equal filters",
                    body.len(),
                    count + 1
                )));
            }
            let fb = body.len() / (count + 1);
            let m = fb * 8;
            let ibf = filter_from(&body[..fb], m)?;
            let zbf = present
                .iter()
                .zip(body[fb..].chunks(fb))
                .map(|(&p, c)| Ok((p, filter_from(c, m)?)))
                .collect::<Result<Vec<_>, HeaderError>>()?;
            (ibf, zbf)
        } else if version == VERSION | COMPRESSED_FLAG {
            if body.len() < 2 {
                return Err(HeaderError::Truncated);
            }
            let m = u16::from_be_bytes([body[0], body[1]]) as usize;
            if m == 0 || !m.is_multiple_of(8) {
                return Err(HeaderError::NotByteAligned(m));
            }
            let fb = m / 8;
            let ibf_bytes = body.get(2..2 + fb).ok_or(HeaderError::Truncated)?;
            let ibf = filter_from(ibf_bytes, m)?;
            let stream = &body[2 + fb..];
            let c = CompressedZbf::from_stream(stream, m * count)?;
            if stream.len() != c.bit_len.div_ceil(8) {
                return Err(HeaderError::Malformed(
                    "trailing bytes after the zBF".into(),
                ));
            }
            (ibf, decompress_zbf(&c, m, &present)?)
        } else {
            return Err(HeaderError::Malformed(format!(
                "unknown version byte {version:#04x}"
            )));
        };
        let h = XbfHeader { ibf, bitmap, zbf };
        h.validate()?;
        Ok(h)
    }
}

fn filter_from(bytes: &[u8], m: usize) -> Result<BitFilter, HeaderError> {
    BitFilter::from_bytes(bytes, m).map_err(|e| HeaderError::Malformed(e.to_string()))
}

fn present(bitmap: &[bool]) -> Vec<PartitionId> {
    bitmap
        .iter()
        .enumerate()
        .filter(|(_, b)| **b)
        .map(|(i, _)| i as PartitionId)
        .collect()
}

pub fn encode_bitmap(bitmap: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bitmap.len().div_ceil(8)];
    for (i, _) in bitmap.iter().enumerate().filter(|(_, b)| **b) {
        out[i / 8] |= 0x80 >> (i % 8);
    }
    out
}

fn split_prefix(bytes: &[u8]) -> Result<(u8, Vec<bool>, &[u8]), HeaderError> {
    if bytes.len() < 4 {
        return Err(HeaderError::Truncated);
    }
    if bytes[0] != MAGIC {
        return Err(HeaderError::Malformed(format!(
            "bad magic {:#04x}",
            bytes[0]
        )));
    }
    let p = u16::from_be_bytes([bytes[2], bytes[3]]) as usize;
    let bm_len = p.div_ceil(8);
    let bm = bytes.get(4..4 + bm_len).ok_or(HeaderError::Truncated)?;
    let bitmap: Vec<bool> = (0..p).map(|i| bm[i / 8] & (0x80 >> (i % 8)) != 0).collect();
    if !p.is_multiple_of(8) && bm[bm_len - 1] & (0xFF >> (p % 8)) != 0 {
        return Err(HeaderError::Malformed("bitmap padding bits set".into()));
    }
    Ok((bytes[1], bitmap, &bytes[4 + bm_len..]))
}

/// Byte offsets of each zBF filter in a raw header, computed from the fixed prefix and the
/// bitmap only.
pub fn filter_offsets(bytes: &[u8]) -> Result<Vec<(PartitionId, usize)>, HeaderError> {
    let (version, bitmap, body) = split_prefix(bytes)?;
    if version != VERSION {
        return Err(HeaderError::Malformed(
            "offsets are defined for raw headers only".into(),
        ));
    }
    let present = present(&bitmap);
    if body.is_empty() || body.len() % (present.len() + 1) != 0 {
        return Err(HeaderError::Malformed(
            "body does not split into equal filters".into(),
        ));
    }
    let fb = body.len() / (present.len() + 1);
    let start = 4 + bitmap.len().div_ceil(8) + fb;
    Ok(present
        .into_iter()
        .enumerate()
        .map(|(rank, p)| (p, start + rank * fb))
        .collect())
}

/// Header for `tree`: one zBF filter per partition the tree touches, holding the one-bit ids of
/// the tree's links there; the iBF starts as the entry partition's filter.
pub fn build_header(
    tree: &MulticastTree,
    parts: &Partitioning,
    entry_partition: PartitionId,
) -> Result<XbfHeader, HeaderError> {
    if tree.links.is_empty() {
        return Err(HeaderError::EmptyTree);
    }
    let m = parts.max_partition_size();
    let mut filters: BTreeMap<PartitionId, BitFilter> = BTreeMap::new();
    for &l in &tree.links {
        if l.index() >= parts.link_count() {
            return Err(HeaderError::UnassignedLink(l.0));
        }
        filters
            .entry(parts.partition_of(l))
            .or_insert_with(|| BitFilter::new(m))
            .set(parts.bit_of(l) as usize);
    }
    let ibf = filters
        .get(&entry_partition)
        .cloned()
        .ok_or(HeaderError::EntryNotOnTree(entry_partition))?;
    XbfHeader::new(ibf, parts.partition_count(), filters.into_iter().collect())
}
