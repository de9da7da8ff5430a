use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geometry::{BoundingBox, Location};

const LEAF_SIZE: usize = 8;

#[derive(Clone, Debug)]
struct KdNode {
    bbox: BoundingBox,
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

/// Static 2-d tree with incremental nearest-neighbor enumeration.
///
/// Points are reported in increasing squared distance; equal distances are
/// broken by the caller-supplied tie keys, so enumeration order is fully
/// deterministic.
#[derive(Clone, Debug)]
pub struct KdTree {
    points: Vec<Location>,
    keys: Vec<usize>,
    perm: Vec<usize>,
    nodes: Vec<KdNode>,
}

impl KdTree {
    pub fn new(points: Vec<Location>, keys: Vec<usize>) -> Self {
        assert_eq!(points.len(), keys.len());
        let mut tree = KdTree {
            perm: (0..points.len()).collect(),
            points,
            keys,
            nodes: Vec::new(),
        };
        if !tree.points.is_empty() {
            tree.build(0, tree.points.len());
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let bbox = self.perm[start..end].iter().fold(BoundingBox::EMPTY, |acc, &i| {
            acc.union(&BoundingBox::of_segment(&self.points[i], &self.points[i]))
        });
        let id = self.nodes.len();
        self.nodes.push(KdNode {
            bbox,
            start,
            end,
            children: None,
        });
        if end - start > LEAF_SIZE {
            let split_x = bbox.max_x - bbox.min_x >= bbox.max_y - bbox.min_y;
            let pts = &self.points;
            let mid = (start + end) / 2;
            self.perm[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                if split_x {
                    pts[a].x.total_cmp(&pts[b].x)
                } else {
                    pts[a].y.total_cmp(&pts[b].y)
                }
            });
            let left = self.build(start, mid);
            let right = self.build(mid, end);
            self.nodes[id].children = Some((left, right));
        }
        id
    }

    /// Enumerate all points by increasing distance to `query`.
    pub fn nearest_iter(&self, query: Location) -> NearestIter<'_> {
        let mut heap = BinaryHeap::new();
        if !self.nodes.is_empty() {
            heap.push(Entry {
                d2: box_dist2(&self.nodes[0].bbox, &query),
                kind: 0,
                key: 0,
                id: 0,
            });
        }
        NearestIter {
            tree: self,
            query,
            heap,
        }
    }

    /// The `n` nearest points as `(index, squared distance)`.
    pub fn nearest(&self, query: Location, n: usize) -> Vec<(usize, f64)> {
        self.nearest_iter(query).take(n).collect()
    }
}

fn box_dist2(b: &BoundingBox, p: &Location) -> f64 {
    let dx = (b.min_x - p.x).max(0.0).max(p.x - b.max_x);
    let dy = (b.min_y - p.y).max(0.0).max(p.y - b.max_y);
    dx * dx + dy * dy
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    d2: f64,
    /// 0 = tree node, 1 = point: nodes at equal distance expand first
    kind: u8,
    key: usize,
    id: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .d2
            .total_cmp(&self.d2)
            .then(other.kind.cmp(&self.kind))
            .then(other.key.cmp(&self.key))
            .then(other.id.cmp(&self.id))
    }
}

pub struct NearestIter<'a> {
    tree: &'a KdTree,
    query: Location,
    heap: BinaryHeap<Entry>,
}

impl Iterator for NearestIter<'_> {
    /// `(point index, squared distance)`
    type Item = (usize, f64);

    fn next(&mut self) -> Option<Self::Item> {
        while let Some(e) = self.heap.pop() {
            if e.kind == 1 {
                return Some((e.id, e.d2));
            }
            let node = &self.tree.nodes[e.id];
            match node.children {
                Some((l, r)) => {
                    for c in [l, r] {
                        self.heap.push(Entry {
                            d2: box_dist2(&self.tree.nodes[c].bbox, &self.query),
                            kind: 0,
                            key: 0,
                            id: c,
                        });
                    }
                }
                None => {
                    for &i in &self.tree.perm[node.start..node.end] {
                        self.heap.push(Entry {
                            d2: self.tree.points[i].dist2(&self.query),
                            kind: 1,
                            key: self.tree.keys[i],
                            id: i,
                        });
                    }
                }
            }
        }
        None
    }
}
