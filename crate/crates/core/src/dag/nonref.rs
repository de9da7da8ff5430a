use super::reference::Search;
use super::{rank_detours, Candidate, Neighbor, NeighborDag, Provenance};
use crate::error::{Error, Result};
use crate::geometry::Location;

/// Conditioning set of a location outside the reference set.
#[derive(Clone, Debug, PartialEq)]
pub struct NonRefNeighbors {
    pub location: Location,
    pub neighbors: Vec<Neighbor>,
}

impl NonRefNeighbors {
    pub fn indices(&self) -> Vec<usize> {
        self.neighbors.iter().map(|n| n.index).collect()
    }
}

impl NeighborDag {
    fn search(&self) -> Search<'_> {
        Search {
            refs: &self.refs,
            keys: &self.ordering.permutation,
            tree: &self.tree,
            barriers: &self.barriers,
            m: self.m,
        }
    }

    /// Neighbors of an arbitrary location `u` among all reference nodes.
    ///
    /// Takes the nearest visible references regardless of their order (a
    /// reference coinciding with `u` comes first). If fewer than `m` are
    /// visible, the rest are chosen by detour score from every reference
    /// visible from one of those neighbors, which does not depend on the
    /// reference ordering.
    pub fn nonref_neighbors(&self, u: Location) -> Result<NonRefNeighbors> {
        u.check_finite()?;
        if self.barriers.contains_unchecked(&u) {
            return Err(Error::LocationInBarrier { x: u.x, y: u.y });
        }
        let m = self.m;
        let mut first = Vec::new();
        let mut nearest = Vec::new();
        for (j, d2) in self.tree.nearest_iter(u) {
            if nearest.len() < m {
                nearest.push(j);
            }
            if d2 == 0.0 || !self.barriers.blocked_unchecked(&u, &self.refs[j]) {
                first.push(Neighbor::first(j));
                if first.len() == m {
                    break;
                }
            }
        }
        if first.is_empty() {
            let found = self.search().escape(&u, &nearest)?;
            if found.is_empty() {
                return Err(Error::NoReachableNeighbor { x: u.x, y: u.y });
            }
            first = found
                .into_iter()
                .map(|index| Neighbor {
                    index,
                    provenance: Provenance::GridEscape,
                    via: None,
                })
                .collect();
        }
        if first.len() < m {
            let members: Vec<usize> = first.iter().map(|n| n.index).collect();
            let need = m - members.len();
            let fill = self.fill_candidates(&u, &members);
            first.extend(fill.into_iter().take(need).map(|c| Neighbor {
                index: c.index,
                provenance: Provenance::SecondOrder,
                via: Some(c.via),
            }));
        }
        Ok(NonRefNeighbors {
            location: u,
            neighbors: first,
        })
    }

    /// Ranked fill candidates for `u` given its direct neighbors `members`.
    pub fn fill_candidates(&self, u: &Location, members: &[usize]) -> Vec<Candidate> {
        rank_detours(&self.refs, &self.ordering.permutation, u, members, |f| self.visible_from(f))
    }
}
