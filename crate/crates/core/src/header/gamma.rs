//! Bit streams and Elias-gamma codes.

use super::HeaderError;

/// Append-only bit stream, MSB first within each byte.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().expect("byte just ensured") |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Appends the low `count` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, count: u32) {
        for i in (0..count).rev() {
            self.push(value >> i & 1 == 1);
        }
    }

    pub fn bit_len(&self) -> usize {
        self.len
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

/// Reads bits written by [`BitWriter`].
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    len: usize,
}

impl<'a> BitReader<'a> {
    /// Reader over the first `len` bits of `bytes`.
    pub fn new(bytes: &'a [u8], len: usize) -> Self {
        BitReader {
            bytes,
            pos: 0,
            len: len.min(bytes.len() * 8),
        }
    }

    pub fn read(&mut self) -> Option<bool> {
        if self.pos >= self.len {
            return None;
        }
        let bit = self.bytes[self.pos / 8] & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Some(bit)
    }

    pub fn position(&self) -> usize {
        self.pos
    }
}

/// Length of the gamma code of `n`: `2 floor(log2 n) + 1`.
pub fn gamma_len(n: u64) -> usize {
    debug_assert!(n >= 1);
    2 * (63 - n.leading_zeros() as usize) + 1
}

/// Writes `floor(log2 n)` zeros followed by `n` in binary.
pub fn elias_gamma_encode(w: &mut BitWriter, n: u64) -> Result<(), HeaderError> {
    if n == 0 {
        return Err(HeaderError::GammaZero);
    }
    let bits = 64 - n.leading_zeros();
    w.push_bits(0, bits - 1);
    w.push_bits(n, bits);
    Ok(())
}

pub fn elias_gamma_decode(r: &mut BitReader<'_>) -> Result<u64, HeaderError> {
    let mut zeros = 0u32;
    loop {
        match r.read() {
            Some(true) => break,
            Some(false) => {
                zeros += 1;
                if zeros > 63 {
                    return Err(HeaderError::Malformed(
                        "gamma prefix longer than 63 bits".into(),
                    ));
                }
            }
            None => return Err(HeaderError::Truncated),
        }
    }
    let mut n = 1u64;
    for _ in 0..zeros {
        n = n << 1 | r.read().ok_or(HeaderError::Truncated)? as u64;
    }
    Ok(n)
}

/// The gamma code of `n` as a `0`/`1` string.
pub fn gamma_string(n: u64) -> Result<String, HeaderError> {
    let mut w = BitWriter::new();
    elias_gamma_encode(&mut w, n)?;
    let mut r = BitReader::new(w.as_bytes(), w.bit_len());
    Ok(std::iter::from_fn(|| r.read())
        .map(|b| if b { '1' } else { '0' })
        .collect())
}
