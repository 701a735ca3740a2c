//! Run-length compression of the concatenated zBF filters.

use crate::bloom::BitFilter;
use crate::partition::PartitionId;

use super::gamma::{elias_gamma_decode, elias_gamma_encode, BitReader, BitWriter};
use super::{HeaderError, XbfHeader};

/// Run-length form of the zBF: the value of the first bit, then the lengths of the maximal runs
/// of equal bits, gamma-coded into `bit_stream` after the first bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedZbf {
    pub first_bit: bool,
    pub run_lengths: Vec<u64>,
    pub bit_stream: Vec<u8>,
    /// Meaningful bits in `bit_stream`, first bit included.
    pub bit_len: usize,
}

impl CompressedZbf {
    pub fn total_bits(&self) -> u64 {
        self.run_lengths.iter().sum()
    }

    /// Decodes the runs from `bytes` until `total_bits` bits are covered.
    pub fn from_stream(bytes: &[u8], total_bits: usize) -> Result<CompressedZbf, HeaderError> {
        let mut r = BitReader::new(bytes, bytes.len() * 8);
        let first_bit = r.read().ok_or(HeaderError::Truncated)?;
        let mut runs = Vec::new();
        let mut covered = 0u64;
        while covered < total_bits as u64 {
            let run = elias_gamma_decode(&mut r)?;
            covered = covered
                .checked_add(run)
                .filter(|&c| c <= total_bits as u64)
                .ok_or_else(|| HeaderError::Malformed("runs overshoot the zBF length".into()))?;
            runs.push(run);
        }
        let bit_len = r.position();
        Ok(CompressedZbf {
            first_bit,
            run_lengths: runs,
            bit_stream: bytes[..bit_len.div_ceil(8)].to_vec(),
            bit_len,
        })
    }
}

/// Compresses a bit sequence.
pub fn compress_bits(bits: impl IntoIterator<Item = bool>) -> CompressedZbf {
    let mut bits = bits.into_iter();
    let mut runs = Vec::new();
    let first_bit = match bits.next() {
        Some(b) => {
            let (mut cur, mut run) = (b, 1u64);
            for b in bits {
                if b == cur {
                    run += 1;
                } else {
                    runs.push(run);
                    cur = b;
                    run = 1;
                }
            }
            runs.push(run);
            b
        }
        None => false,
    };
    let mut w = BitWriter::new();
    w.push(first_bit);
    for &r in &runs {
        elias_gamma_encode(&mut w, r).expect("runs are positive");
    }
    CompressedZbf {
        first_bit,
        run_lengths: runs,
        bit_len: w.bit_len(),
        bit_stream: w.into_bytes(),
    }
}

/// Expands runs back into bits.
pub fn decompress_bits(c: &CompressedZbf) -> Vec<bool> {
    let mut out = Vec::with_capacity(c.total_bits() as usize);
    let mut cur = c.first_bit;
    for &r in &c.run_lengths {
        out.extend(std::iter::repeat_n(cur, r as usize));
        cur = !cur;
    }
    out
}

/// Compresses the header's zBF filters, concatenated in ascending partition order.
pub fn compress_zbf(h: &XbfHeader) -> CompressedZbf {
    compress_bits(
        h.zbf
            .iter()
            .flat_map(|(_, f)| (0..f.len()).map(move |i| f.get(i))),
    )
}

/// Inverse of [`compress_zbf`] given the filter length and the partitions from the bitmap.
pub fn decompress_zbf(
    c: &CompressedZbf,
    m: usize,
    partitions: &[PartitionId],
) -> Result<Vec<(PartitionId, BitFilter)>, HeaderError> {
    let bits = decompress_bits(c);
    if bits.len() != m * partitions.len() {
        return Err(HeaderError::Malformed(format!(
            "runs cover {} bits, expected {} filters of {m}",
            bits.len(),
            partitions.len()
        )));
    }
    Ok(partitions
        .iter()
        .zip(bits.chunks(m.max(1)))
        .map(|(&p, chunk)| {
            let f = BitFilter::from_positions(
                m,
                chunk
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| **b)
                    .map(|(i, _)| i),
            );
            (p, f)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn all_zero_filter() {
        let c = compress_bits(std::iter::repeat_n(false, 256));
        assert!(!c.first_bit);
        assert_eq!(c.run_lengths, vec![256]);
        assert_eq!(c.bit_len, 1 + 17);
    }

    #[test]
    fn alternating_expands() {
        let c = compress_bits((0..256).map(|i| i % 2 == 1));
        assert_eq!(c.run_lengths.len(), 256);
        assert!(c.bit_len > 256);
        assert_eq!(
            decompress_bits(&c),
            (0..256).map(|i| i % 2 == 1).collect::<Vec<_>>()
        );
    }

    #[test]
    fn stream_matches_runs() {
        let bits: Vec<bool> = (0..300)
            .map(|i| i % 37 == 0 || (100..140).contains(&i))
            .collect();
        let c = compress_bits(bits.iter().copied());
        let d = CompressedZbf::from_stream(&c.bit_stream, bits.len()).unwrap();
        assert_eq!(d, c);
        assert!(CompressedZbf::from_stream(&c.bit_stream, bits.len() + 5).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(bits in proptest::collection::vec(any::<bool>(), 1..2000)) {
            let c = compress_bits(bits.iter().copied());
            prop_assert_eq!(c.total_bits() as usize, bits.len());
            prop_assert_eq!(decompress_bits(&c), bits.clone());
            prop_assert_eq!(CompressedZbf::from_stream(&c.bit_stream, bits.len()).unwrap(), c);
        }
    }
}
