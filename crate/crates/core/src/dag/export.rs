use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Neighbor, NeighborDag, Provenance};
use crate::error::{Error, Result};

/// One DAG edge: `neighbor -> target`, both as positions in visit order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRow {
    pub target: usize,
    pub neighbor: usize,
    pub provenance: Provenance,
    pub distance: f64,
}

impl NeighborDag {
    /// All edges, by target then by neighbor rank.
    pub fn export_edges(&self) -> Vec<EdgeRow> {
        let mut rows = Vec::new();
        for (i, ns) in self.neighbors.iter().enumerate() {
            for n in ns {
                rows.push(EdgeRow {
                    target: i,
                    neighbor: n.index,
                    provenance: n.provenance,
                    distance: self.refs[i].dist(&self.refs[n.index]),
                });
            }
        }
        rows
    }
}

pub fn write_edges_csv<W: Write>(rows: &[EdgeRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if rows.is_empty() {
        w.write_record(["target", "neighbor", "provenance", "distance"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_edges_csv<R: Read>(reader: R) -> Result<Vec<EdgeRow>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Rebuild per-node neighbor lists for `k` nodes from edge rows.
pub fn neighbor_lists_from_edges(k: usize, rows: &[EdgeRow]) -> Result<Vec<Vec<Neighbor>>> {
    let mut lists = vec![Vec::new(); k];
    for r in rows {
        if r.target >= k || r.neighbor >= r.target {
            return Err(Error::Parse(format!(
                "edge {} -> {} is not a backward edge among {k} nodes",
                r.neighbor, r.target
            )));
        }
        lists[r.target].push(Neighbor {
            index: r.neighbor,
            provenance: r.provenance,
            via: None,
        });
    }
    Ok(lists)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::{build_reference_dag, Ordering};
    use crate::geometry::{BarrierSet, Location};

    #[test]
    fn chain_round_trip() {
        let pts = vec![Location::new(0., 0.), Location::new(1., 0.), Location::new(2., 0.)];
        let dag = build_reference_dag(&pts, Ordering::identity(3), 2, &BarrierSet::empty()).unwrap();
        let rows = dag.export_edges();
        assert_eq!(rows.len(), 3);
        let mut buf = Vec::new();
        write_edges_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("target,neighbor,provenance,distance\n"));
        assert!(text.contains("2,0,first_order,2"));
        let back = read_edges_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        let lists = neighbor_lists_from_edges(3, &back).unwrap();
        for i in 0..3 {
            assert_eq!(lists[i], dag.neighbors(i));
        }
    }

    #[test]
    fn empty_output() {
        let mut buf = Vec::new();
        write_edges_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "target,neighbor,provenance,distance\n");
        assert!(read_edges_csv("target,neighbor,provenance,distance\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn forward_edge_rejected() {
        let rows = [EdgeRow {
            target: 0,
            neighbor: 1,
            provenance: Provenance::FirstOrder,
            distance: 1.0,
        }];
        assert!(neighbor_lists_from_edges(2, &rows).is_err());
    }
}
