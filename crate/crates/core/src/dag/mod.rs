//! Barrier-conforming neighbor graphs over ordered reference locations.

mod export;
pub mod kdtree;
mod nonref;
mod ordering;
mod reference;

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::geometry::{BarrierSet, Location};

pub use export::{neighbor_lists_from_edges, read_edges_csv, write_edges_csv, EdgeRow};
pub use kdtree::KdTree;
pub use nonref::NonRefNeighbors;
pub use ordering::{order_reference, OrderStrategy, Ordering};
pub use reference::{build_reference_dag, MAX_FILL_ROUNDS};

/// How a neighbor was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Straight segment to the target is unblocked.
    FirstOrder,
    /// Neighbor of a neighbor, ranked by detour length.
    SecondOrder,
    /// Reached through a waypoint of the escape grid.
    GridEscape,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::FirstOrder => "first_order",
            Provenance::SecondOrder => "second_order",
            Provenance::GridEscape => "grid_escape",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One conditioning neighbor, identified by its position in visit order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub provenance: Provenance,
    /// For second-order neighbors: the neighbor through which it was reached.
    pub via: Option<usize>,
}

impl Neighbor {
    pub(crate) fn first(index: usize) -> Self {
        Neighbor {
            index,
            provenance: Provenance::FirstOrder,
            via: None,
        }
    }
}

/// Second-order candidate with its detour score.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub index: usize,
    /// `d(target, via) + d(via, index) - d(target, index)`
    pub score: f64,
    pub via: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DagWarning {
    /// Detour filling stopped before reaching `m` neighbors.
    ShortNeighborSet { node: usize, found: usize },
}

/// Ordered reference set with per-node neighbor lists.
///
/// Node `i` is the i-th location in visit order; every neighbor index of
/// node `i` is smaller than `i`.
#[derive(Clone, Debug)]
pub struct NeighborDag {
    pub(crate) refs: Vec<Location>,
    pub(crate) ordering: Ordering,
    pub(crate) m: usize,
    pub(crate) neighbors: Vec<Vec<Neighbor>>,
    pub(crate) warnings: Vec<DagWarning>,
    pub(crate) barriers: BarrierSet,
    pub(crate) tree: KdTree,
    visible: Vec<OnceLock<Vec<usize>>>,
    positions: HashMap<(u64, u64), usize>,
}

impl NeighborDag {
    pub(crate) fn assemble(
        refs: Vec<Location>,
        ordering: Ordering,
        m: usize,
        neighbors: Vec<Vec<Neighbor>>,
        warnings: Vec<DagWarning>,
        barriers: BarrierSet,
        tree: KdTree,
    ) -> Self {
        let visible = (0..refs.len()).map(|_| OnceLock::new()).collect();
        let mut positions = HashMap::with_capacity(refs.len());
        for (i, r) in refs.iter().enumerate() {
            positions.entry(r.key()).or_insert(i);
        }
        NeighborDag {
            positions,
            refs,
            ordering,
            m,
            neighbors,
            warnings,
            barriers,
            tree,
            visible,
        }
    }

    /// Position of the reference node at exactly `loc`, if any.
    pub fn position_of(&self, loc: &Location) -> Option<usize> {
        self.positions.get(&loc.key()).copied()
    }

    /// Number of reference nodes.
    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Reference locations in visit order.
    pub fn refs(&self) -> &[Location] {
        &self.refs
    }

    pub fn ordering(&self) -> &Ordering {
        &self.ordering
    }

    /// Original index of the node at position `i`.
    pub fn original_index(&self, i: usize) -> usize {
        self.ordering.permutation[i]
    }

    pub fn neighbors(&self, i: usize) -> &[Neighbor] {
        &self.neighbors[i]
    }

    pub fn neighbor_indices(&self, i: usize) -> Vec<usize> {
        self.neighbors[i].iter().map(|n| n.index).collect()
    }

    pub fn warnings(&self) -> &[DagWarning] {
        &self.warnings
    }

    pub fn barriers(&self) -> &BarrierSet {
        &self.barriers
    }

    /// Number of nodes with at least one neighbor of the given provenance.
    pub fn count_with(&self, provenance: Provenance) -> usize {
        self.neighbors
            .iter()
            .filter(|ns| ns.iter().any(|n| n.provenance == provenance))
            .count()
    }

    /// Children lists: `children()[j]` holds every node that has `j` as a neighbor.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.len()];
        for (i, ns) in self.neighbors.iter().enumerate() {
            for n in ns {
                out[n.index].push(i);
            }
        }
        out
    }

    /// All reference nodes (earlier or later) with an unblocked segment to node `f`.
    pub(crate) fn visible_from(&self, f: usize) -> &[usize] {
        self.visible[f].get_or_init(|| {
            let p = self.refs[f];
            (0..self.len())
                .filter(|&j| j != f && !self.barriers.blocked_unchecked(&p, &self.refs[j]))
                .collect()
        })
    }
}

/// Rank detour candidates for `target` given its current `members`.
///
/// `pool(f)` lists the nodes reachable from member `f`. A candidate reachable
/// through several members keeps its smallest score; the result is sorted by
/// (score, original index).
pub(crate) fn rank_detours<'a, P>(
    refs: &[Location],
    keys: &[usize],
    target: &Location,
    members: &[usize],
    mut pool: P,
) -> Vec<Candidate>
where
    P: FnMut(usize) -> &'a [usize],
{
    let mut best: HashMap<usize, Candidate> = HashMap::new();
    for &f in members {
        let d_tf = target.dist(&refs[f]);
        for &c in pool(f) {
            if members.contains(&c) {
                continue;
            }
            let score = d_tf + refs[f].dist(&refs[c]) - target.dist(&refs[c]);
            match best.get_mut(&c) {
                Some(cur) if score < cur.score => {
                    cur.score = score;
                    cur.via = f;
                }
                Some(_) => {}
                None => {
                    best.insert(c, Candidate { index: c, score, via: f });
                }
            }
        }
    }
    let mut out: Vec<Candidate> = best.into_values().collect();
    out.sort_by(|a, b| a.score.total_cmp(&b.score).then(keys[a.index].cmp(&keys[b.index])));
    out
}

/// Second-order candidates of reference node `i` from its current members:
/// the neighbors of its neighbors, minus the members themselves.
pub fn second_order_candidates(
    refs: &[Location],
    keys: &[usize],
    neighbors: &[Vec<Neighbor>],
    i: usize,
    members: &[usize],
) -> Vec<Candidate> {
    let lists: Vec<Vec<usize>> = members
        .iter()
        .map(|&f| neighbors[f].iter().map(|n| n.index).collect())
        .collect();
    let mut lookup: HashMap<usize, &[usize]> = HashMap::new();
    for (f, l) in members.iter().zip(&lists) {
        lookup.insert(*f, l.as_slice());
    }
    rank_detours(refs, keys, &refs[i], members, |f| lookup[&f])
}
