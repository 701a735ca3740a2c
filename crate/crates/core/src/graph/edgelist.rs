//! Tab-separated edge-list files: `src<TAB>dst<TAB>traffic`, one directed link per line.
//!
//! Lines starting with `#` and blank lines are ignored. The traffic column may be omitted, in
//! which case it defaults to `1`.

use std::collections::HashSet;
use std::fmt::Write as _;

use super::{GraphError, NetworkGraph};

/// One parsed line.
pub type EdgeEntry = (String, String, f64);

/// Parses edge-list text. With `symmetrize`, every link without an explicit reverse gets one
/// carrying the same traffic.
pub fn parse_edge_list(text: &str, symmetrize: bool) -> Result<Vec<EdgeEntry>, GraphError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t').map(str::trim);
        let parse_err = |msg: &str| GraphError::Parse {
            line: i + 1,
            message: msg.to_owned(),
        };
        let src = cols.next().filter(|s| !s.is_empty());
        let dst = cols.next().filter(|s| !s.is_empty());
        let (src, dst) = match (src, dst) {
            (Some(s), Some(d)) => (s, d),
            _ => return Err(parse_err("expected `src<TAB>dst[<TAB>traffic]`")),
        };
        let traffic = match cols.next() {
            None | Some("") => 1.0,
            Some(t) => t
                .parse::<f64>()
                .map_err(|e| parse_err(&format!("bad traffic `{t}`: {e}")))?,
        };
        if cols.next().is_some() {
            return Err(parse_err("too many columns"));
        }
        entries.push((src.to_owned(), dst.to_owned(), traffic));
    }
    if symmetrize {
        let present: HashSet<(String, String)> = entries
            .iter()
            .map(|(s, d, _)| (s.clone(), d.clone()))
            .collect();
        let mut added = HashSet::new();
        let mut extra = Vec::new();
        for (s, d, t) in &entries {
            let rev = (d.clone(), s.clone());
            if !present.contains(&rev) && added.insert(rev) {
                extra.push((d.clone(), s.clone(), *t));
            }
        }
        entries.extend(extra);
    }
    Ok(entries)
}

/// Renders a graph as edge-list text, links in id order.
pub fn write_edge_list(g: &NetworkGraph) -> String {
    let mut out = String::with_capacity(g.link_count() * 16);
    for l in g.links() {
        let _ = writeln!(out, "{}\t{}\t{}", g.label(l.src), g.label(l.dst), l.traffic);
    }
    out
}
