use std::collections::HashMap;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use xbf::graph::edgelist::write_edge_list;
use xbf::graph::{betweenness_weights, ConnectivityGraph, NetworkGraph, NodeId};
use xbf::header::{build_header, XbfHeader};
use xbf::partition::{
    jigsaw, powergraph_partition, quality, PartitionConfig, PartitionQuality, Partitioning,
    PartitioningExport,
};
use xbf::rng;
use xbf::sim::{
    build_multicast_tree, entry_partition, run_experiment, sample_sinks, ExperimentSummary, Scheme,
};
use xbf::stats::mean;
use xbf::topo::gen_traffic;

use crate::descriptor::{Partitioner, RunDescriptor, WeightSource};
use crate::output::Outputs;

/// What a command leaves behind: staged files and a line for the terminal.
pub struct Done {
    pub outputs: Outputs,
    pub message: String,
}

struct Net {
    g: NetworkGraph,
    name: String,
}

fn load_net(d: &RunDescriptor) -> Result<Net> {
    let spec = d.topology()?;
    let g = spec.build()?;
    log::info!(
        "{}: {} nodes, {} links",
        spec.name(),
        g.node_count(),
        g.link_count()
    );
    Ok(Net {
        g,
        name: spec.name(),
    })
}

fn link_weights(d: &RunDescriptor, g: &NetworkGraph) -> Result<Vec<f64>> {
    Ok(match d.weight_source()? {
        WeightSource::Edgelist => g.traffic(),
        WeightSource::Uniform => vec![1.0; g.link_count()],
        WeightSource::Betweenness => betweenness_weights(g, d.exec()),
        WeightSource::Synthesized | WeightSource::Auto => {
            let seed = rng::derive_seed(d.seed, &[0x7AF]);
            gen_traffic(g, &d.traffic, d.traffic_trials, seed, d.exec())?
        }
    })
}

fn run_partitioner(
    g: &NetworkGraph,
    weights: &[f64],
    which: Partitioner,
    cfg: &PartitionConfig,
) -> Result<Partitioning> {
    Ok(match which {
        Partitioner::Jigsaw => jigsaw(g, weights, cfg)?,
        Partitioner::Powergraph => powergraph_partition(g, cfg.max_partition_size, cfg.seed)?,
    })
}

/// Loads `d.partitioning` if set, otherwise partitions with `d.partitioner`.
fn partitioning_for(d: &RunDescriptor, g: &NetworkGraph) -> Result<Partitioning> {
    if let Some(path) = &d.partitioning {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let export: PartitioningExport =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        return export
            .into_partitioning(g)
            .with_context(|| format!("{} does not fit the topology", path.display()));
    }
    let w = link_weights(d, g)?;
    run_partitioner(g, &w, d.partitioner, &d.partition)
}

pub fn gen(d: &RunDescriptor) -> Result<Done> {
    let net = load_net(d)?;
    let w = link_weights(d, &net.g)?;
    let g = net.g.with_traffic(&w)?;
    let mut outputs = Outputs::default();
    let file = format!("{}.tsv", net.name);
    outputs.add(file.clone(), write_edge_list(&g));
    Ok(Done {
        outputs,
        message: format!("{file}: {} nodes, {} links", g.node_count(), g.link_count()),
    })
}

#[derive(Debug, Serialize)]
struct FillBucket {
    /// Fill fraction range `(from, to]` of the cap, in percent.
    from_pct: usize,
    to_pct: usize,
    partitions: usize,
}

#[derive(Debug, Serialize)]
struct QualityReport {
    topology: String,
    partitioner: Partitioner,
    traffic_aware: bool,
    nodes: usize,
    links: usize,
    max_partition_size: usize,
    partition_count: usize,
    popper_count: usize,
    totalv: f64,
    totalv_uniform: f64,
    max_fill: usize,
    min_fill: usize,
    fill: Vec<usize>,
    fill_histogram: Vec<FillBucket>,
}

fn quality_report(
    net: &Net,
    parts: &Partitioning,
    weights: &[f64],
    partitioner: Partitioner,
    traffic_aware: bool,
) -> Result<(QualityReport, PartitionQuality)> {
    let cg = ConnectivityGraph::from_network(&net.g, weights)?;
    let q = quality(&net.g, parts, &cg)?;
    let cg_u = ConnectivityGraph::from_network(&net.g, &vec![1.0; net.g.link_count()])?;
    let q_u = quality(&net.g, parts, &cg_u)?;
    let fill = parts.fill();
    let cap = parts.max_partition_size();
    let fill_histogram = (0..10)
        .map(|i| FillBucket {
            from_pct: i * 10,
            to_pct: (i + 1) * 10,
            partitions: fill
                .iter()
                .filter(|&&f| {
                    let pct = f * 100;
                    pct > i * 10 * cap && pct <= (i + 1) * 10 * cap || (i == 0 && f == 0)
                })
                .count(),
        })
        .collect();
    let report = QualityReport {
        topology: net.name.clone(),
        partitioner,
        traffic_aware,
        nodes: net.g.node_count(),
        links: net.g.link_count(),
        max_partition_size: cap,
        partition_count: q.partition_count,
        popper_count: q.popper_count,
        totalv: q.totalv,
        totalv_uniform: q_u.totalv,
        max_fill: q.max_fill,
        min_fill: q.min_fill,
        fill,
        fill_histogram,
    };
    Ok((report, q))
}

pub fn partition(d: &RunDescriptor) -> Result<Done> {
    let net = load_net(d)?;
    let w = link_weights(d, &net.g)?;
    let parts = run_partitioner(&net.g, &w, d.partitioner, &d.partition)?;
    let aware = d.partitioner == Partitioner::Jigsaw && d.partition.traffic_aware;
    let (report, _) = quality_report(&net, &parts, &w, d.partitioner, aware)?;
    let mut outputs = Outputs::default();
    outputs.add_json("partitioning.json", &PartitioningExport::from(&parts))?;
    outputs.add_json("quality.json", &report)?;
    Ok(Done {
        outputs,
        message: format!(
            "{}: {} partitions, {} poppers, totalv {:.1}",
            net.name, report.partition_count, report.popper_count, report.totalv
        ),
    })
}

#[derive(Debug, Serialize)]
struct HeaderRow {
    sinks: usize,
    trial: usize,
    source: String,
    sink_nodes: String,
    tree_links: usize,
    partitions: usize,
    raw_bits: usize,
    compressed_bits: usize,
    raw_bytes: usize,
    compressed_bytes: usize,
    raw_hex: String,
    compressed_hex: String,
}

fn header_row(
    g: &NetworkGraph,
    parts: &Partitioning,
    source: NodeId,
    sinks: &[NodeId],
    trial: usize,
) -> Result<HeaderRow> {
    let tree = build_multicast_tree(g, source, sinks)?;
    let entry = entry_partition(g, parts, &tree)?;
    let h = build_header(&tree, parts, entry)?;
    let raw = h.serialize()?;
    let comp = h.serialize_compressed()?;
    Ok(HeaderRow {
        sinks: tree.sinks.len(),
        trial,
        source: g.label(source).to_owned(),
        sink_nodes: tree
            .sinks
            .iter()
            .map(|&v| g.label(v))
            .collect::<Vec<_>>()
            .join(" "),
        tree_links: tree.links.len(),
        partitions: h.zbf.len(),
        raw_bits: h.raw_bits(),
        compressed_bits: h.compressed_bits(),
        raw_bytes: raw.len(),
        compressed_bytes: comp.len(),
        raw_hex: hex::encode(raw),
        compressed_hex: hex::encode(comp),
    })
}

pub fn headers(d: &RunDescriptor) -> Result<Done> {
    let net = load_net(d)?;
    let g = &net.g;
    let parts = partitioning_for(d, g)?;
    let rows = match &d.source {
        Some(src) => {
            let node = |l: &str| {
                g.node_by_label(l)
                    .with_context(|| format!("no node labelled {l}"))
            };
            let source = node(src)?;
            if d.to.is_empty() {
                bail!("--source needs at least one --to sink");
            }
            let sinks = d.to.iter().map(|l| node(l)).collect::<Result<Vec<_>>>()?;
            vec![header_row(g, &parts, source, &sinks, 0)?]
        }
        None => {
            let n = g.node_count();
            let mut rows = Vec::with_capacity(d.sinks.len() * d.trials);
            for &s in &d.sinks {
                if s == 0 || s >= n {
                    bail!("sink count {s} must lie in 1..{n}");
                }
                for t in 0..d.trials {
                    let mut r = rng::stream(d.seed, &[0x4EAD, s as u64, t as u64]);
                    let source = NodeId(rand::Rng::gen_range(&mut r, 0..n as u32));
                    let sinks = sample_sinks(&mut r, n, source, s);
                    rows.push(header_row(g, &parts, source, &sinks, t)?);
                }
            }
            rows
        }
    };
    let raw = mean(&rows.iter().map(|r| r.raw_bits as f64).collect::<Vec<_>>());
    let comp = mean(
        &rows
            .iter()
            .map(|r| r.compressed_bits as f64)
            .collect::<Vec<_>>(),
    );
    let mut outputs = Outputs::default();
    outputs.add_csv("headers.csv", &rows)?;
    Ok(Done {
        outputs,
        message: format!(
            "{} headers, mean {raw:.1} bits raw, {comp:.1} bits compressed",
            rows.len()
        ),
    })
}

#[derive(Debug, Serialize)]
struct DecodedHeader {
    format: &'static str,
    m: usize,
    partition_count: usize,
    ibf: String,
    zbf: Vec<DecodedFilter>,
}

#[derive(Debug, Serialize)]
struct DecodedFilter {
    partition: u32,
    bits: String,
}

/// Parses a hex-encoded wire header and renders it as JSON.
pub fn decode_header(hex_text: &str) -> Result<String> {
    let bytes = hex::decode(hex_text.trim()).context("header is not valid hex")?;
    let h = XbfHeader::deserialize(&bytes)?;
    let compressed = bytes
        .get(1)
        .is_some_and(|v| v & xbf::header::COMPRESSED_FLAG != 0);
    let out = DecodedHeader {
        format: if compressed { "compressed" } else { "raw" },
        m: h.m(),
        partition_count: h.partition_count(),
        ibf: h.ibf.to_bit_str(),
        zbf: h
            .zbf
            .iter()
            .map(|(p, f)| DecodedFilter {
                partition: *p,
                bits: f.to_bit_str(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&out)?)
}

fn summary_line(s: &ExperimentSummary) -> String {
    s.per_sinks
        .iter()
        .map(|p| {
            format!(
                "s={}: hdr {:.1}/{:.1} bits, pops {:.2}, poppers {:.2}, false firings {:.2}",
                p.sinks,
                p.hdr_bits.mean,
                p.hdr_bits_compressed.mean,
                p.pops.mean,
                p.poppers_on_tree.mean,
                p.false_firings.mean
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn simulate(d: &RunDescriptor) -> Result<Done> {
    let net = load_net(d)?;
    let parts = match d.scheme {
        Scheme::Xbf => Some(partitioning_for(d, &net.g)?),
        Scheme::Classical => None,
    };
    let cfg = d.experiment(&net.name, d.scheme);
    let report = run_experiment(&net.g, parts.as_ref(), &cfg)?;
    let mut outputs = Outputs::default();
    outputs.add_csv("trials.csv", &report.rows)?;
    outputs.add_json("summary.json", &report.summary)?;
    Ok(Done {
        outputs,
        message: summary_line(&report.summary),
    })
}

pub fn lps(d: &RunDescriptor) -> Result<Done> {
    let net = load_net(d)?;
    if d.lps.p.is_empty() {
        bail!("lps.p must list at least one success fraction");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut head = vec!["p".to_owned()];
    head.extend(d.sinks.iter().map(|s| format!("s{s}")));
    w.write_record(&head)?;
    let mut lines = Vec::new();
    for &p in &d.lps.p {
        let mut row = vec![p.to_string()];
        for &s in &d.sinks {
            let seed = rng::derive_seed(d.seed, &[0x195, s as u64]);
            let m =
                xbf::bloom::min_filter_length(&net.g, s, p, d.k_rule, d.trials, seed, d.exec())?;
            row.push(m.to_string());
        }
        lines.push(row.join(" "));
        w.write_record(&row)?;
    }
    let mut outputs = Outputs::default();
    outputs.add("lps.csv", w.into_inner().context("flushing CSV")?);
    Ok(Done {
        outputs,
        message: format!("{}\n{}", head.join(" "), lines.join("\n")),
    })
}

#[derive(Debug, Serialize)]
struct CompareRow {
    variant: String,
    sinks: usize,
    partitions: Option<usize>,
    poppers: Option<usize>,
    totalv: Option<f64>,
    mean_pops: f64,
    mean_poppers_on_tree: f64,
    mean_hdr_bits: f64,
    mean_hdr_bits_compressed: f64,
    mean_false_firings: f64,
    loop_fraction: f64,
}

#[derive(Debug, Serialize)]
struct CompareVariant {
    variant: String,
    quality: Option<QualityReport>,
    summary: ExperimentSummary,
}

/// Traffic-aware Jigsaw, traffic-blind Jigsaw, Powergraph and the classical scheme on one
/// topology, all fed the same trial streams.
pub fn compare(d: &RunDescriptor) -> Result<Done> {
    let net = load_net(d)?;
    let w = link_weights(d, &net.g)?;
    let blind = PartitionConfig {
        traffic_aware: false,
        ..d.partition.clone()
    };
    let aware = PartitionConfig {
        traffic_aware: true,
        ..d.partition.clone()
    };
    let plans = [
        ("jigsaw", Partitioner::Jigsaw, aware),
        ("jigsaw-blind", Partitioner::Jigsaw, blind.clone()),
        ("powergraph", Partitioner::Powergraph, blind),
    ];
    let mut rows = Vec::new();
    let mut variants = Vec::new();
    let mut totals: HashMap<&str, f64> = HashMap::new();
    for (name, which, cfg) in plans {
        let parts = run_partitioner(&net.g, &w, which, &cfg)?;
        let (q, _) = quality_report(&net, &parts, &w, which, cfg.traffic_aware)?;
        let report = run_experiment(&net.g, Some(&parts), &d.experiment(&net.name, Scheme::Xbf))?;
        totals.insert(name, q.totalv);
        for s in &report.summary.per_sinks {
            rows.push(CompareRow {
                variant: name.into(),
                sinks: s.sinks,
                partitions: Some(q.partition_count),
                poppers: Some(q.popper_count),
                totalv: Some(q.totalv),
                mean_pops: s.pops.mean,
                mean_poppers_on_tree: s.poppers_on_tree.mean,
                mean_hdr_bits: s.hdr_bits.mean,
                mean_hdr_bits_compressed: s.hdr_bits_compressed.mean,
                mean_false_firings: s.false_firings.mean,
                loop_fraction: s.loop_fraction,
            });
        }
        variants.push(CompareVariant {
            variant: name.into(),
            quality: Some(q),
            summary: report.summary,
        });
    }
    let classical = run_experiment(&net.g, None, &d.experiment(&net.name, Scheme::Classical))?;
    for s in &classical.summary.per_sinks {
        rows.push(CompareRow {
            variant: "classical".into(),
            sinks: s.sinks,
            partitions: None,
            poppers: None,
            totalv: None,
            mean_pops: 0.0,
            mean_poppers_on_tree: 0.0,
            mean_hdr_bits: s.hdr_bits.mean,
            mean_hdr_bits_compressed: s.hdr_bits_compressed.mean,
            mean_false_firings: s.false_firings.mean,
            loop_fraction: s.loop_fraction,
        });
    }
    variants.push(CompareVariant {
        variant: "classical".into(),
        quality: None,
        summary: classical.summary,
    });
    let mut outputs = Outputs::default();
    outputs.add_csv("compare.csv", &rows)?;
    outputs.add_json("compare.json", &variants)?;
    Ok(Done {
        outputs,
        message: format!(
            "totalv: jigsaw {:.1}, jigsaw-blind {:.1}, powergraph {:.1}",
            totals["jigsaw"], totals["jigsaw-blind"], totals["powergraph"]
        ),
    })
}
