//! `xbf`: topology generation, partitioning, header inspection and simulation campaigns.

mod commands;
mod descriptor;
mod output;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use xbf::sim::Scheme;
use xbf::topo::{TopoKind, TopoSpec};

use descriptor::{Partitioner, RunDescriptor, WeightSource};

#[derive(Debug, Parser)]
#[command(
    name = "xbf",
    version,
    about = "Extensible Bloom-filter source routing experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate or normalise a topology and write it as an edge list.
    Gen,
    /// Partition the topology; writes partitioning.json and quality.json.
    Partition,
    /// Build XBF headers for random (or explicit) trees; writes headers.csv.
    Headers {
        /// Decode a hex wire header and print it instead.
        #[arg(long, value_name = "HEX")]
        decode: Option<String>,
    },
    /// Run a simulation campaign; writes trials.csv and summary.json.
    Simulate,
    /// Minimum classical filter lengths L_p(s); writes lps.csv.
    Lps,
    /// Jigsaw (traffic-aware and blind), Powergraph and classical side by side.
    Compare,
}

/// Every flag overrides the descriptor key of the same name.
#[derive(Debug, Args)]
struct Flags {
    /// TOML run descriptor.
    #[arg(short, long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores, 1 = sequential).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long, global = true, value_enum)]
    partitioner: Option<Partitioner>,
    /// Sink counts, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    sinks: Option<Vec<usize>>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Add the reverse of every edge-list link that lacks one.
    #[arg(long, global = true)]
    symmetrize: bool,
    #[arg(long, global = true, value_enum)]
    weights: Option<WeightSource>,
    #[arg(long, global = true)]
    traffic_trials: Option<usize>,
    #[arg(long, global = true)]
    max_partition_size: Option<usize>,
    /// Partition count multiplier.
    #[arg(long, global = true)]
    imbalance: Option<f64>,
    /// Ignore link weights when partitioning with Jigsaw.
    #[arg(long, global = true)]
    traffic_blind: bool,
    #[arg(long, global = true)]
    classical_m: Option<usize>,
    /// Success fractions for `lps`, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Reuse a partitioning JSON instead of partitioning again.
    #[arg(long, global = true, value_name = "FILE")]
    partitioning: Option<PathBuf>,
    /// Explicit tree for `headers`: source label.
    #[arg(long, global = true, value_name = "LABEL")]
    source: Option<String>,
    /// Explicit tree for `headers`: sink labels, comma separated.
    #[arg(long, global = true, value_delimiter = ',', value_name = "LABELS")]
    to: Option<Vec<String>>,
    /// Barabási–Albert topology with N nodes, M links per new node.
    #[arg(long, global = true, num_args = 2, value_names = ["N", "M"])]
    ba: Option<Vec<usize>>,
    /// Erdős–Rényi topology with N nodes; P defaults to just above the connectivity threshold.
    #[arg(long, global = true, num_args = 1..=2, value_names = ["N", "P"])]
    er: Option<Vec<f64>>,
    /// Edge-list topology file.
    #[arg(long, global = true, value_name = "FILE")]
    topology: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum SchemeArg {
    Xbf,
    Classical,
}

impl Flags {
    fn descriptor(&self) -> Result<RunDescriptor> {
        let mut d = match &self.config {
            Some(path) => RunDescriptor::load(path)?,
            None => RunDescriptor::default(),
        };
        let picked = [
            self.ba.is_some(),
            self.er.is_some(),
            self.topology.is_some(),
        ];
        if picked.iter().filter(|&&b| b).count() > 1 {
            bail!("--ba, --er and --topology are mutually exclusive");
        }
        let kind = if let Some(v) = &self.ba {
            Some(TopoKind::Ba { n: v[0], m: v[1] })
        } else if let Some(v) = &self.er {
            if v[0] < 0.0 || v[0].fract() != 0.0 {
                bail!(
                    "--er node count must be a non-negative integer, got {}",
                    v[0]
                );
            }
            Some(TopoKind::Er {
                n: v[0] as usize,
                p: v.get(1).copied(),
            })
        } else {
            self.topology.clone().map(|path| TopoKind::File { path })
        };
        if let Some(kind) = kind {
            d.topology = Some(TopoSpec {
                kind,
                seed: 0,
                symmetrize: false,
            });
        }
        if self.symmetrize {
            d.topology
                .as_mut()
                .context("--symmetrize needs a topology")?
                .symmetrize = true;
        }
        if let Some(v) = self.seed {
            d.seed = v;
        }
        if let Some(v) = self.jobs {
            d.jobs = v;
        }
        if let Some(v) = &self.out {
            d.out = v.clone();
        }
        if let Some(v) = self.scheme {
            d.scheme = match v {
                SchemeArg::Xbf => Scheme::Xbf,
                SchemeArg::Classical => Scheme::Classical,
            };
        }
        if let Some(v) = self.partitioner {
            d.partitioner = v;
        }
        if let Some(v) = &self.sinks {
            d.sinks = v.clone();
        }
        if let Some(v) = self.trials {
            d.trials = v;
        }
        if let Some(v) = self.weights {
            d.weights = v;
        }
        if let Some(v) = self.traffic_trials {
            d.traffic_trials = v;
        }
        if let Some(v) = self.max_partition_size {
            d.partition.max_partition_size = v;
        }
        if let Some(v) = self.imbalance {
            d.partition.imbalance = v;
        }
        if self.traffic_blind {
            d.partition.traffic_aware = false;
        }
        if let Some(v) = self.classical_m {
            d.classical_m = v;
        }
        if let Some(v) = &self.p {
            d.lps.p = v.clone();
        }
        if let Some(v) = &self.partitioning {
            d.partitioning = Some(v.clone());
        }
        if let Some(v) = &self.source {
            d.source = Some(v.clone());
        }
        if let Some(v) = &self.to {
            d.to = v.clone();
        }
        d.finalize()
    }
}

fn configure_threads(jobs: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    if jobs > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring the worker pool")?;
    }
    #[cfg(not(feature = "parallel"))]
    if jobs > 1 {
        log::warn!("built without the `parallel` feature; --jobs {jobs} runs sequentially");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Command::Headers { decode: Some(hex) } = &cli.command {
        let _ = writeln!(std::io::stdout(), "{}", commands::decode_header(hex)?);
        return Ok(());
    }
    let d = cli.flags.descriptor()?;
    configure_threads(d.jobs)?;
    let (name, done) = match cli.command {
        Command::Gen => ("gen", commands::gen(&d)?),
        Command::Partition => ("partition", commands::partition(&d)?),
        Command::Headers { .. } => ("headers", commands::headers(&d)?),
        Command::Simulate => ("simulate", commands::simulate(&d)?),
        Command::Lps => ("lps", commands::lps(&d)?),
        Command::Compare => ("compare", commands::compare(&d)?),
    };
    let written = done.outputs.commit(&d.out, name, &d)?;
    // a closed stdout (e.g. piped into `head`) is not an error once the files are written
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", done.message);
    for p in written {
        let _ = writeln!(out, "wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("XBF_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
