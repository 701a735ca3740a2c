//! # XBF
//!
//! Extensible Bloom-filter source routing. A network is split into partitions of at most
//! `max_partition_size` directed links; inside a partition every link owns one unique bit of a
//! fixed-length filter, so membership tests are exact. Packets carry an active filter (iBF) plus
//! the filters of every partition the multicast tree touches (zBF), and switches sitting between
//! partitions ("poppers") copy the right zBF filter into the iBF as the packet crosses over.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: directed network graphs, edge-list ingestion, the link-adjacency
//!   ("connectivity") graph, legacy-switch collapsing and edge betweenness.
//! - [`partition`]: Jigsaw (multilevel vertex partitioning of the connectivity graph minimising
//!   traffic-weighted communication volume), the Powergraph streaming baseline, and the popping
//!   metrics.
//! - [`bloom`]: bit filters, random-k and one-bit link identifiers, the `L_p(s)` metric.
//! - [`header`]: the XBF header, its wire format and Elias-gamma run-length compression of the zBF.
//! - [`sim`]: multicast trees, XBF and classical forwarding, experiment campaigns.
//! - [`topo`]: Barabási–Albert / Erdős–Rényi generators and traffic synthesis.
//!
//! Monte Carlo loops go through [`exec::Execution`], which runs on rayon when the `parallel`
//! feature is enabled and sequentially otherwise. Results are identical in both modes.
//!
//! ```
//! use xbf::graph::NetworkGraph;
//! use xbf::partition::{jigsaw, PartitionConfig};
//! use xbf::sim::{build_multicast_tree, deliver_xbf};
//! use xbf::topo::gen_ba;
//!
//! let g = gen_ba(60, 2, 7).unwrap();
//! let cfg = PartitionConfig { max_partition_size: 32, ..PartitionConfig::default() };
//! let weights = vec![1.0; g.link_count()];
//! let parts = jigsaw(&g, &weights, &cfg).unwrap();
//! let sinks = [g.node(5).unwrap(), g.node(40).unwrap()];
//! let tree = build_multicast_tree(&g, g.node(0).unwrap(), &sinks).unwrap();
//! let trace = deliver_xbf(&g, &parts, &tree).unwrap();
//! assert!(trace.false_firings.is_empty());
//! assert_eq!(trace.delivered, tree.sinks);
//! ```

#![deny(missing_debug_implementations)]

pub mod bloom;
pub mod exec;
pub mod graph;
pub mod header;
pub mod partition;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod topo;

pub use graph::{LinkId, NetworkGraph, NodeId};
