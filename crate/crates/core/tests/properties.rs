use proptest::prelude::*;
use rand::Rng;
use xbf::bloom::BitFilter;
use xbf::exec::Execution;
use xbf::graph::{betweenness_weights, NodeId};
use xbf::header::{
    compress_bits, decompress_bits, elias_gamma_decode, elias_gamma_encode, gamma::BitReader,
    gamma::BitWriter, XbfHeader,
};
use xbf::partition::{jigsaw, powergraph_partition, PartitionConfig};
use xbf::rng;
use xbf::sim::{build_multicast_tree, deliver_xbf, sample_sinks};
use xbf::topo::gen_ba;

fn header_strategy() -> impl Strategy<Value = XbfHeader> {
    (1usize..=8, 1usize..40).prop_flat_map(|(bytes, parts)| {
        let m = bytes * 8;
        (
            proptest::collection::vec(any::<bool>(), m),
            proptest::collection::vec(
                proptest::option::of(proptest::collection::vec(any::<bool>(), m)),
                parts,
            ),
        )
            .prop_map(move |(ibf, zbf)| {
                let f = |bits: &[bool]| BitFilter::from_positions(m, (0..m).filter(|&i| bits[i]));
                let zbf = zbf
                    .iter()
                    .enumerate()
                    .filter_map(|(p, b)| b.as_ref().map(|b| (p as u32, f(b))))
                    .collect();
                XbfHeader::new(f(&ibf), parts, zbf).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn headers_roundtrip_in_every_encoding(h in header_strategy()) {
        for bytes in [h.serialize().unwrap(), h.serialize_compressed().unwrap(), h.serialize_auto().unwrap()] {
            prop_assert_eq!(XbfHeader::deserialize(&bytes).unwrap(), h.clone());
        }
        let raw = h.serialize().unwrap();
        prop_assert_eq!(raw.len() * 8, 32 + h.partition_count().div_ceil(8) * 8 + h.m() * (h.zbf.len() + 1));
    }

    #[test]
    fn truncated_headers_never_panic(h in header_strategy(), cut in 0usize..64) {
        let bytes = h.serialize_compressed().unwrap();
        let cut = cut.min(bytes.len());
        let _ = XbfHeader::deserialize(&bytes[..bytes.len() - cut]);
    }

    #[test]
    fn gamma_roundtrips(values in proptest::collection::vec(1u64..=u64::MAX, 1..50)) {
        let mut w = BitWriter::new();
        for &v in &values {
            elias_gamma_encode(&mut w, v).unwrap();
        }
        let expected: usize = values.iter().map(|v| 2 * (63 - v.leading_zeros() as usize) + 1).sum();
        prop_assert_eq!(w.bit_len(), expected);
        let len = w.bit_len();
        let bytes = w.into_bytes();
        let mut r = BitReader::new(&bytes, len);
        for &v in &values {
            prop_assert_eq!(elias_gamma_decode(&mut r).unwrap(), v);
        }
    }

    #[test]
    fn run_lengths_roundtrip(bits in proptest::collection::vec(any::<bool>(), 1..500)) {
        let c = compress_bits(bits.iter().copied());
        prop_assert_eq!(c.total_bits() as usize, bits.len());
        prop_assert!(c.run_lengths.iter().all(|&r| r > 0));
        prop_assert_eq!(decompress_bits(&c), bits);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn partitions_respect_the_cap_and_delivery_is_exact(
        n in 10usize..120,
        m in 1usize..4,
        cap in 6usize..80,
        seed in any::<u64>(),
    ) {
        let g = gen_ba(n, m.min(n - 1), seed).unwrap();
        let w = betweenness_weights(&g, Execution::Sequential);
        let cfg = PartitionConfig { max_partition_size: cap, seed, ..Default::default() };
        for parts in [jigsaw(&g, &w, &cfg).unwrap(), powergraph_partition(&g, cap, seed).unwrap()] {
            let mut sizes = vec![0usize; parts.partition_count()];
            for &p in parts.assignment() {
                sizes[p as usize] += 1;
            }
            prop_assert!(sizes.iter().all(|&s| s > 0 && s <= cap), "{:?}", sizes);
            let mut r = rng::stream(seed, &[1]);
            for _ in 0..10 {
                let src = NodeId(r.gen_range(0..n as u32));
                let count = r.gen_range(1..n.min(15));
                let sinks = sample_sinks(&mut r, n, src, count);
                let tree = build_multicast_tree(&g, src, &sinks).unwrap();
                let tr = deliver_xbf(&g, &parts, &tree).unwrap();
                prop_assert!(tr.is_exact(&tree));
            }
        }
    }
}

#[test]
fn sequential_and_parallel_paths_agree() {
    let g = gen_ba(150, 2, 9).unwrap();
    assert_eq!(
        betweenness_weights(&g, Execution::Sequential),
        betweenness_weights(&g, Execution::Parallel)
    );
    // float sums are order sensitive; fixed chunking keeps them bit-identical
    let sum = |e: Execution| {
        e.chunked_fold(
            10_000,
            97,
            || 0.0f64,
            |a, i| *a += 1.0 / (i as f64 + 1.0),
            |a, b| *a += b,
        )
    };
    assert_eq!(
        sum(Execution::Sequential).to_bits(),
        sum(Execution::Parallel).to_bits()
    );
}
