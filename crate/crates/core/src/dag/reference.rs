use log::warn;

use super::{second_order_candidates, DagWarning, KdTree, Neighbor, NeighborDag, Ordering, Provenance};
use crate::error::{Error, Result};
use crate::geometry::{build_escape_grid, BarrierSet, Location};
use crate::par;

/// Maximum number of detour-filling rounds per node.
pub const MAX_FILL_ROUNDS: usize = 5;

/// Below this many earlier nodes a direct sort beats walking the k-d tree.
const BRUTE_FORCE_LIMIT: usize = 256;

/// Escape-grid step when no blocked segment overlaps a polygon (zero-width
/// barriers only), as a fraction of the grid half length.
const ZERO_OVERLAP_DIVISIONS: f64 = 20.0;
/// Lower bound on the escape-grid step, as a fraction of the half length.
const MAX_DIVISIONS: f64 = 100.0;

/// Shared read-only state of a neighbor search.
pub(crate) struct Search<'a> {
    pub refs: &'a [Location],
    pub keys: &'a [usize],
    pub tree: &'a KdTree,
    pub barriers: &'a BarrierSet,
    pub m: usize,
}

impl Search<'_> {
    /// Nodes before `i` in visit order, nearest first.
    fn nearest_earlier(&self, i: usize) -> Box<dyn Iterator<Item = usize> + '_> {
        let p = self.refs[i];
        if i < BRUTE_FORCE_LIMIT {
            let mut idx: Vec<usize> = (0..i).collect();
            idx.sort_by(|&a, &b| {
                p.dist2(&self.refs[a])
                    .total_cmp(&p.dist2(&self.refs[b]))
                    .then(self.keys[a].cmp(&self.keys[b]))
            });
            Box::new(idx.into_iter())
        } else {
            Box::new(self.tree.nearest_iter(p).map(|(j, _)| j).filter(move |&j| j < i))
        }
    }

    /// Visible earlier nodes (up to m) of node `i`, or escape-grid neighbors
    /// when none is visible.
    fn direct_neighbors(&self, i: usize) -> Result<Vec<Neighbor>> {
        let p = self.refs[i];
        let mut visible = Vec::new();
        let mut nearest = Vec::new();
        for j in self.nearest_earlier(i) {
            if nearest.len() < self.m {
                nearest.push(j);
            }
            if !self.barriers.blocked_unchecked(&p, &self.refs[j]) {
                visible.push(Neighbor::first(j));
                if visible.len() == self.m {
                    break;
                }
            }
        }
        if !visible.is_empty() {
            return Ok(visible);
        }
        let found = self.escape(&p, &nearest)?;
        if found.is_empty() {
            return Err(Error::IsolatedUnreachable { node: self.keys[i] });
        }
        Ok(found
            .into_iter()
            .map(|index| Neighbor {
                index,
                provenance: Provenance::GridEscape,
                via: None,
            })
            .collect())
    }

    /// Scan the escape grid around `center` for a waypoint that sees the
    /// center and at least one of the blocked `crossing` nodes.
    pub(crate) fn escape(&self, center: &Location, crossing: &[usize]) -> Result<Vec<usize>> {
        if crossing.is_empty() {
            return Ok(Vec::new());
        }
        let overlaps: Vec<f64> = crossing
            .iter()
            .map(|&j| self.barriers.overlap_length(center, &self.refs[j]))
            .collect();
        let r_l = crossing
            .iter()
            .map(|&j| center.dist(&self.refs[j]))
            .fold(0.0f64, f64::max);
        let info: Vec<(Location, f64)> = crossing
            .iter()
            .zip(&overlaps)
            .map(|(&j, &o)| {
                let o = if o > 0.0 {
                    o.max(r_l / MAX_DIVISIONS)
                } else {
                    r_l / ZERO_OVERLAP_DIVISIONS
                };
                (self.refs[j], o)
            })
            .collect();
        let grid = build_escape_grid(*center, &info)?;
        for g in &grid.points {
            if g == center
                || self.barriers.contains_unchecked(g)
                || self.barriers.blocked_unchecked(g, center)
            {
                continue;
            }
            let found: Vec<usize> = crossing
                .iter()
                .copied()
                .filter(|&j| !self.barriers.blocked_unchecked(&self.refs[j], g))
                .collect();
            if !found.is_empty() {
                return Ok(found);
            }
        }
        Ok(Vec::new())
    }
}

/// Build the neighbor graph over `locations` (original order) visited in `ordering`.
///
/// The first `m + 1` nodes condition on every earlier node and must be
/// mutually visible. Later nodes take their nearest visible earlier nodes,
/// fall back to the escape grid when none is visible, and are topped up to
/// `m` with detour neighbors.
pub fn build_reference_dag(
    locations: &[Location],
    ordering: Ordering,
    m: usize,
    barriers: &BarrierSet,
) -> Result<NeighborDag> {
    if m == 0 {
        return Err(Error::InvalidConfig("neighbor budget m must be at least 1".into()));
    }
    if ordering.len() != locations.len() {
        return Err(Error::InvalidPermutation(format!(
            "ordering has {} entries for {} locations",
            ordering.len(),
            locations.len()
        )));
    }
    for loc in locations {
        loc.check_finite()?;
        if barriers.contains_unchecked(loc) {
            return Err(Error::LocationInBarrier { x: loc.x, y: loc.y });
        }
    }
    let refs = ordering.apply(locations);
    let keys = ordering.permutation.clone();
    let k = refs.len();

    let head = k.min(m + 1);
    for b in 0..head {
        for a in 0..b {
            if barriers.blocked_unchecked(&refs[a], &refs[b]) {
                return Err(Error::InitialNodesBlocked {
                    first: keys[a],
                    second: keys[b],
                });
            }
        }
    }

    let tree = KdTree::new(refs.clone(), keys.clone());
    let search = Search {
        refs: &refs,
        keys: &keys,
        tree: &tree,
        barriers,
        m,
    };

    let tail = par::try_map_range(k - head, |t| search.direct_neighbors(head + t))?;
    let mut neighbors: Vec<Vec<Neighbor>> = (0..head).map(|i| (0..i).map(Neighbor::first).collect()).collect();
    neighbors.extend(tail);

    let mut warnings = Vec::new();
    for i in head..k {
        if neighbors[i].len() >= m {
            continue;
        }
        for _ in 0..MAX_FILL_ROUNDS {
            let members: Vec<usize> = neighbors[i].iter().map(|n| n.index).collect();
            let cands = second_order_candidates(&refs, &keys, &neighbors, i, &members);
            if cands.is_empty() {
                break;
            }
            let need = m - members.len();
            neighbors[i].extend(cands.into_iter().take(need).map(|c| Neighbor {
                index: c.index,
                provenance: Provenance::SecondOrder,
                via: Some(c.via),
            }));
            if neighbors[i].len() >= m {
                break;
            }
        }
        if neighbors[i].len() < m {
            warn!(
                "reference node {} has {} of {} neighbors after detour filling",
                keys[i],
                neighbors[i].len(),
                m
            );
            warnings.push(DagWarning::ShortNeighborSet {
                node: i,
                found: neighbors[i].len(),
            });
        }
    }

    Ok(NeighborDag::assemble(
        refs,
        ordering,
        m,
        neighbors,
        warnings,
        barriers.clone(),
        tree,
    ))
}
