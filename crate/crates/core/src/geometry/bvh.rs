use super::Location;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BoundingBox {
    pub const EMPTY: BoundingBox = BoundingBox {
        min_x: f64::INFINITY,
        min_y: f64::INFINITY,
        max_x: f64::NEG_INFINITY,
        max_y: f64::NEG_INFINITY,
    };

    pub fn of_segment(a: &Location, b: &Location) -> Self {
        Self {
            min_x: a.x.min(b.x),
            min_y: a.y.min(b.y),
            max_x: a.x.max(b.x),
            max_y: a.y.max(b.y),
        }
    }

    pub fn union(&self, o: &BoundingBox) -> Self {
        Self {
            min_x: self.min_x.min(o.min_x),
            min_y: self.min_y.min(o.min_y),
            max_x: self.max_x.max(o.max_x),
            max_y: self.max_y.max(o.max_y),
        }
    }

    /// Closed-box overlap test.
    #[inline]
    pub fn intersects(&self, o: &BoundingBox) -> bool {
        self.min_x <= o.max_x && o.min_x <= self.max_x && self.min_y <= o.max_y && o.min_y <= self.max_y
    }

    #[inline]
    pub fn contains(&self, p: &Location) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }
}

const LEAF_SIZE: usize = 4;

#[derive(Clone, Debug)]
enum Node {
    Leaf { start: usize, end: usize },
    Inner { left: usize, right: usize },
}

/// Static bounding-volume hierarchy over edge boxes.
///
/// Queries return every item whose box intersects the query box; the tree
/// only prunes subtrees whose union box misses the query, so there are no
/// false negatives.
#[derive(Clone, Debug, Default)]
pub struct EdgeIndex {
    boxes: Vec<BoundingBox>,
    node_boxes: Vec<BoundingBox>,
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl EdgeIndex {
    pub fn build(boxes: Vec<BoundingBox>) -> Self {
        let mut index = EdgeIndex {
            order: (0..boxes.len()).collect(),
            boxes,
            node_boxes: Vec::new(),
            nodes: Vec::new(),
        };
        if !index.boxes.is_empty() {
            index.build_node(0, index.boxes.len());
        }
        index
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let bbox = self.order[start..end]
            .iter()
            .fold(BoundingBox::EMPTY, |acc, &i| acc.union(&self.boxes[i]));
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { start, end });
        self.node_boxes.push(bbox);
        if end - start <= LEAF_SIZE {
            return id;
        }
        let split_x = bbox.max_x - bbox.min_x >= bbox.max_y - bbox.min_y;
        let boxes = &self.boxes;
        let center = |i: usize| {
            let b = &boxes[i];
            if split_x {
                b.min_x + b.max_x
            } else {
                b.min_y + b.max_y
            }
        };
        let mid = (start + end) / 2;
        self.order[start..end]
            .select_nth_unstable_by(mid - start, |&a, &b| center(a).total_cmp(&center(b)));
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Inner { left, right };
        id
    }

    /// Push into `out` the ids of all items whose box intersects `query`.
    pub fn query(&self, query: &BoundingBox, out: &mut Vec<usize>) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            if !self.node_boxes[n].intersects(query) {
                continue;
            }
            match self.nodes[n] {
                Node::Leaf { start, end } => {
                    for &i in &self.order[start..end] {
                        if self.boxes[i].intersects(query) {
                            out.push(i);
                        }
                    }
                }
                Node::Inner { left, right } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bbox(x0: f64, y0: f64, x1: f64, y1: f64) -> BoundingBox {
        BoundingBox::of_segment(&Location::new(x0, y0), &Location::new(x1, y1))
    }

    proptest! {
        #[test]
        fn query_is_superset_of_brute_force(
            segs in prop::collection::vec((0.0..10.0f64, 0.0..10.0f64, -1.0..1.0f64, -1.0..1.0f64), 0..200),
            q in (0.0..10.0f64, 0.0..10.0f64, -3.0..3.0f64, -3.0..3.0f64),
        ) {
            let boxes: Vec<_> = segs.iter().map(|&(x, y, dx, dy)| bbox(x, y, x + dx, y + dy)).collect();
            let index = EdgeIndex::build(boxes.clone());
            let query = bbox(q.0, q.1, q.0 + q.2, q.1 + q.3);
            let mut got = Vec::new();
            index.query(&query, &mut got);
            got.sort_unstable();
            let want: Vec<usize> = (0..boxes.len()).filter(|&i| boxes[i].intersects(&query)).collect();
            prop_assert_eq!(got, want);
        }
    }
}
