use std::fmt;

use super::BloomError;

/// Fixed-length bit vector. Bit `i` is bit `i % 8` (LSB first) of byte `i / 8` in byte form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitFilter {
    words: Vec<u64>,
    len: usize,
}

impl BitFilter {
    /// All-zero filter of `len` bits.
    ///
    /// # Panics
    /// If `len` is 0.
    pub fn new(len: usize) -> BitFilter {
        assert!(len >= 1, "filter length must be at least 1 bit");
        BitFilter {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn ones(len: usize) -> BitFilter {
        let mut f = BitFilter::new(len);
        f.words.iter_mut().for_each(|w| *w = u64::MAX);
        f.clear_tail();
        f
    }

    pub fn from_positions(len: usize, positions: impl IntoIterator<Item = usize>) -> BitFilter {
        let mut f = BitFilter::new(len);
        for p in positions {
            f.set(p);
        }
        f
    }

    /// Parses a string of `0`/`1` characters; character `i` is bit `i`.
    pub fn from_bit_str(s: &str) -> Result<BitFilter, BloomError> {
        if s.is_empty() {
            return Err(BloomError::InvalidParams("empty bit string".into()));
        }
        let mut f = BitFilter::new(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => f.set(i),
                other => {
                    return Err(BloomError::InvalidParams(format!(
                        "bad bit character {other:?}"
                    )))
                }
            }
        }
        Ok(f)
    }

    pub fn to_bit_str(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    /// Reads `len` bits from `bytes` (LSB-first within each byte).
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<BitFilter, BloomError> {
        if len == 0 || bytes.len() != len.div_ceil(8) {
            return Err(BloomError::InvalidParams(format!(
                "{} bytes cannot hold a {len}-bit filter",
                bytes.len()
            )));
        }
        if !len.is_multiple_of(8) && bytes[bytes.len() - 1] >> (len % 8) != 0 {
            return Err(BloomError::InvalidParams("padding bits set".into()));
        }
        let mut f = BitFilter::new(len);
        for (i, &b) in bytes.iter().enumerate() {
            f.words[i / 8] |= (b as u64) << (8 * (i % 8));
        }
        Ok(f)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        (0..self.len.div_ceil(8))
            .map(|i| (self.words[i / 8] >> (8 * (i % 8))) as u8)
            .collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; filters have at least one bit.
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit {i} out of range for {}-bit filter",
            self.len
        );
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit {i} out of range for {}-bit filter",
            self.len
        );
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn ones_positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    pub fn or_assign(&mut self, other: &BitFilter) -> Result<(), BloomError> {
        self.same_len(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        Ok(())
    }

    /// `self AND other == other`.
    pub fn contains(&self, other: &BitFilter) -> Result<bool, BloomError> {
        self.same_len(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & b == *b))
    }

    fn same_len(&self, other: &BitFilter) -> Result<(), BloomError> {
        if self.len != other.len {
            return Err(BloomError::MixedLength {
                expected: self.len,
                got: other.len,
            });
        }
        Ok(())
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            *self.words.last_mut().expect("len >= 1") &= (1u64 << rem) - 1;
        }
    }
}

impl fmt::Debug for BitFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            write!(f, "BitFilter({})", self.to_bit_str())
        } else {
            write!(f, "BitFilter({} bits, {} set)", self.len, self.count_ones())
        }
    }
}

/// Bitwise OR of `filters`; the empty OR is the zero filter of length `len`.
pub fn bf_or<'a>(
    len: usize,
    filters: impl IntoIterator<Item = &'a BitFilter>,
) -> Result<BitFilter, BloomError> {
    if len == 0 {
        return Err(BloomError::InvalidParams(
            "filter length must be at least 1".into(),
        ));
    }
    let mut out = BitFilter::new(len);
    for f in filters {
        out.or_assign(f)?;
    }
    Ok(out)
}

/// Bloom membership: every bit of `l` is set in `f`.
pub fn bf_member(f: &BitFilter, l: &BitFilter) -> Result<bool, BloomError> {
    f.contains(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_or_is_zero() {
        assert_eq!(bf_or(8, []).unwrap().to_bit_str(), "00000000");
    }

    #[test]
    fn four_ids_make_example_filter() {
        let ids: Vec<BitFilter> = ["00100001", "00010100", "00001000", "00000101"]
            .iter()
            .map(|s| BitFilter::from_bit_str(s).unwrap())
            .collect();
        let f = bf_or(8, &ids).unwrap();
        assert_eq!(f.to_bit_str(), "00111101");
        for l in &ids {
            assert!(bf_member(&f, l).unwrap());
        }
        // an id whose bits all happen to be set: a false positive
        assert!(bf_member(&f, &BitFilter::from_bit_str("00100100").unwrap()).unwrap());
        assert!(!bf_member(&f, &BitFilter::from_bit_str("01001000").unwrap()).unwrap());
    }

    #[test]
    fn zero_filter_has_no_members() {
        let zero = BitFilter::new(16);
        assert!(!bf_member(&zero, &BitFilter::from_positions(16, [3])).unwrap());
    }

    #[test]
    fn mixed_lengths_rejected() {
        let a = BitFilter::new(8);
        let b = BitFilter::new(16);
        assert!(matches!(
            bf_member(&a, &b),
            Err(BloomError::MixedLength { .. })
        ));
        assert!(bf_or(8, [&a, &b]).is_err());
    }

    #[test]
    fn byte_order_is_lsb_first() {
        let f = BitFilter::from_positions(16, [0, 9, 15]);
        assert_eq!(f.to_bytes(), vec![0x01, 0x82]);
        assert_eq!(BitFilter::from_bytes(&[0x01, 0x82], 16).unwrap(), f);
        assert!(BitFilter::from_bytes(&[0xFF], 4).is_err());
    }

    #[test]
    fn ones_respects_length() {
        let f = BitFilter::ones(70);
        assert_eq!(f.count_ones(), 70);
        assert_eq!(f, BitFilter::from_positions(70, 0..70));
    }

    fn filter(len: usize) -> impl Strategy<Value = BitFilter> {
        proptest::collection::vec(any::<bool>(), len).prop_map(move |bits| {
            BitFilter::from_positions(
                len,
                bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i),
            )
        })
    }

    proptest! {
        #[test]
        fn or_laws(a in filter(77), b in filter(77), c in filter(77)) {
            let ab = bf_or(77, [&a, &b]).unwrap();
            prop_assert_eq!(&ab, &bf_or(77, [&b, &a]).unwrap());
            prop_assert_eq!(bf_or(77, [&ab, &c]).unwrap(), bf_or(77, [&a, &bf_or(77, [&b, &c]).unwrap()]).unwrap());
            prop_assert_eq!(bf_or(77, [&a, &a]).unwrap(), a.clone());
            prop_assert!(bf_member(&ab, &a).unwrap() && bf_member(&ab, &b).unwrap());
            prop_assert!(ab.count_ones() <= a.count_ones() + b.count_ones());
        }

        #[test]
        fn bytes_roundtrip(a in filter(45)) {
            prop_assert_eq!(BitFilter::from_bytes(&a.to_bytes(), 45).unwrap(), a.clone());
            prop_assert_eq!(BitFilter::from_bit_str(&a.to_bit_str()).unwrap(), a);
        }
    }
}
