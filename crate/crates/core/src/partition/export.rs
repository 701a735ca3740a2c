use serde::{Deserialize, Serialize};

use crate::graph::{LinkId, NetworkGraph};

use super::{PartitionError, PartitionId, Partitioning};

/// JSON form of a [`Partitioning`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitioningExport {
    pub partition_count: usize,
    pub max_partition_size: usize,
    /// Partition of each link, indexed by link id.
    pub assignment: Vec<PartitionId>,
    pub one_bit_ids: Vec<OneBitId>,
    pub poppers: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneBitId {
    pub link: u32,
    pub partition: PartitionId,
    pub bit: u32,
}

impl From<&Partitioning> for PartitioningExport {
    fn from(p: &Partitioning) -> Self {
        PartitioningExport {
            partition_count: p.partition_count(),
            max_partition_size: p.max_partition_size(),
            assignment: p.assignment().to_vec(),
            one_bit_ids: (0..p.link_count() as u32)
                .map(|l| OneBitId {
                    link: l,
                    partition: p.partition_of(LinkId(l)),
                    bit: p.bit_of(LinkId(l)),
                })
                .collect(),
            poppers: p.poppers().iter().map(|n| n.0).collect(),
        }
    }
}

impl PartitioningExport {
    /// Rebuilds the partitioning over `g`, checking that the stored derived fields match.
    pub fn into_partitioning(self, g: &NetworkGraph) -> Result<Partitioning, PartitionError> {
        let p = Partitioning::from_assignment(g, &self.assignment, self.max_partition_size)?;
        if p.partition_count() != self.partition_count {
            return Err(PartitionError::InvalidConfig(format!(
                "partition_count {} but assignment uses {}",
                self.partition_count,
                p.partition_count()
            )));
        }
        for id in &self.one_bit_ids {
            let l = LinkId(id.link);
            if id.link as usize >= p.link_count()
                || p.partition_of(l) != id.partition
                || p.bit_of(l) != id.bit
            {
                return Err(PartitionError::UnknownLink(l));
            }
        }
        if let Some(n) = self
            .poppers
            .iter()
            .zip(p.poppers())
            .find(|(a, b)| **a != b.0)
            .map(|(_, b)| *b)
            .or_else(|| (self.poppers.len() != p.poppers().len()).then(|| p.poppers()[0]))
        {
            return Err(PartitionError::PopperMismatch(n));
        }
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("export is plain data")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_network_graph;

    #[test]
    fn json_roundtrip() {
        let (g, _) = build_network_graph([
            ("a", "b", 1.0),
            ("b", "a", 1.0),
            ("b", "c", 1.0),
            ("c", "b", 1.0),
        ])
        .unwrap();
        let p = Partitioning::from_assignment(&g, &[0, 1, 1, 0], 2).unwrap();
        let json = PartitioningExport::from(&p).to_json();
        let back: PartitioningExport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_partitioning(&g).unwrap(), p);
        assert!(json.contains("\"one_bit_ids\""));
    }

    #[test]
    fn tampered_bits_rejected() {
        let (g, _) = build_network_graph([("a", "b", 1.0), ("b", "a", 1.0)]).unwrap();
        let p = Partitioning::from_assignment(&g, &[0, 0], 2).unwrap();
        let mut e = PartitioningExport::from(&p);
        e.one_bit_ids[0].bit = 1;
        assert!(e.into_partitioning(&g).is_err());
    }
}
