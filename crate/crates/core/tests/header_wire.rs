//! Wire format against hand-assembled golden bytes.
//!
//! Header under test: m = 8, three partitions, iBF bits {0, 7}, zBF for partition 0 = {1} and
//! partition 2 = {6, 7}.
//!
//! raw:        5b 01 | 0003 | a0 (bitmap 101.....) | 81 | 02 | c0   (filters LSB-first)
//! compressed: 5b 81 | 0003 | a0 | 0008 | 81 | zBF bits 01000000 00000011
//!             -> first bit 0, runs 1 1 12 2 -> 0 1 1 0001100 010 -> 63 10

use xbf::bloom::BitFilter;
use xbf::header::{
    compress_bits, decompress_bits, filter_offsets, gamma_string, HeaderError, XbfHeader,
};

fn golden(name: &str) -> Vec<u8> {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    hex_decode(std::fs::read_to_string(path).unwrap().trim())
}

fn hex_decode(s: &str) -> Vec<u8> {
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap())
        .collect()
}

fn sample() -> XbfHeader {
    XbfHeader::new(
        BitFilter::from_positions(8, [0, 7]),
        3,
        vec![
            (2, BitFilter::from_positions(8, [6, 7])),
            (0, BitFilter::from_positions(8, [1])),
        ],
    )
    .unwrap()
}

#[test]
fn raw_bytes_match_golden() {
    let h = sample();
    assert_eq!(h.serialize().unwrap(), golden("raw_m8_p3.hex"));
    assert_eq!(XbfHeader::deserialize(&golden("raw_m8_p3.hex")).unwrap(), h);
    assert_eq!(h.raw_bits(), 8 + 3 + 16);
}

#[test]
fn compressed_bytes_match_golden() {
    let h = sample();
    assert_eq!(
        h.serialize_compressed().unwrap(),
        golden("compressed_m8_p3.hex")
    );
    assert_eq!(
        XbfHeader::deserialize(&golden("compressed_m8_p3.hex")).unwrap(),
        h
    );
    assert_eq!(h.compressed_bits(), 8 + 3 + 13);
}

#[test]
fn auto_picks_the_shorter_encoding() {
    // raw is 8 bytes, compressed 10
    assert_eq!(sample().serialize_auto().unwrap(), golden("raw_m8_p3.hex"));
}

#[test]
fn filter_offsets_follow_the_bitmap() {
    assert_eq!(
        filter_offsets(&golden("raw_m8_p3.hex")).unwrap(),
        vec![(0, 6), (2, 7)]
    );
}

#[test]
fn gamma_codes_by_hand() {
    assert_eq!(gamma_string(1).unwrap(), "1");
    assert!(gamma_string(0).is_err());
    assert_eq!(gamma_string(2).unwrap(), "010");
    assert_eq!(gamma_string(5).unwrap(), "00101");
    assert_eq!(gamma_string(12).unwrap(), "0001100");
}

#[test]
fn run_lengths_by_hand() {
    let bits: Vec<bool> = "0001111101".chars().map(|c| c == '1').collect();
    let c = compress_bits(bits.iter().copied());
    assert!(!c.first_bit);
    assert_eq!(c.run_lengths, vec![3, 5, 1, 1]);
    // 1 + |011| + |00101| + |1| + |1|
    assert_eq!(c.bit_len, 1 + 3 + 5 + 1 + 1);
    assert_eq!(decompress_bits(&c), bits);
}

#[test]
fn corrupt_inputs_are_rejected() {
    let raw = golden("raw_m8_p3.hex");
    assert!(matches!(
        XbfHeader::deserialize(&raw[..3]),
        Err(HeaderError::Truncated)
    ));
    let mut bad_magic = raw.clone();
    bad_magic[0] = 0x5C;
    assert!(XbfHeader::deserialize(&bad_magic).is_err());
    let mut padding = raw.clone();
    padding[4] |= 0x01;
    assert!(XbfHeader::deserialize(&padding).is_err());
    // one byte short: the body no longer splits into three equal filters
    assert!(XbfHeader::deserialize(&raw[..raw.len() - 1]).is_err());
    let mut trailing = golden("compressed_m8_p3.hex");
    trailing.push(0);
    assert!(XbfHeader::deserialize(&trailing).is_err());
    let mut version = raw;
    version[1] = 0x02;
    assert!(XbfHeader::deserialize(&version).is_err());
}
