use super::bvh::{BoundingBox, EdgeIndex};
use super::predicates::{classify, crossing_param, orient, within_closed, Contact};
use super::Location;
use crate::error::{Error, Result};

/// One barrier geometry.
#[derive(Clone, Debug, PartialEq)]
pub enum Barrier {
    /// Closed rings: the first is the shell, the rest are holes.
    Polygon { rings: Vec<Vec<Location>> },
    /// Zero-width barrier such as a fault or a door.
    Polyline { vertices: Vec<Location> },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: Location,
    pub b: Location,
    pub barrier: usize,
    /// Position of `a` in its ring or polyline.
    pub seq: usize,
}

/// Validated, indexed barrier collection. Immutable once built.
#[derive(Clone, Debug, Default)]
pub struct BarrierSet {
    barriers: Vec<Barrier>,
    edges: Vec<Edge>,
    index: EdgeIndex,
    barrier_boxes: Vec<BoundingBox>,
    barrier_index: EdgeIndex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Containment {
    Inside,
    Boundary,
    Outside,
}

impl BarrierSet {
    /// The empty (barrier-free) domain.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Build from closed polygon rings, one polygon per ring.
    pub fn load_barriers(rings: Vec<Vec<Location>>) -> Result<Self> {
        Self::new(rings.into_iter().map(|r| Barrier::Polygon { rings: vec![r] }).collect())
    }

    pub fn new(barriers: Vec<Barrier>) -> Result<Self> {
        let mut cleaned = Vec::with_capacity(barriers.len());
        for barrier in barriers {
            cleaned.push(match barrier {
                Barrier::Polygon { rings } => {
                    if rings.is_empty() {
                        return Err(Error::InvalidRing("polygon without rings".into()));
                    }
                    let rings = rings.into_iter().map(validate_ring).collect::<Result<Vec<_>>>()?;
                    Barrier::Polygon { rings }
                }
                Barrier::Polyline { vertices } => Barrier::Polyline {
                    vertices: validate_polyline(vertices)?,
                },
            });
        }

        let mut edges = Vec::new();
        let mut barrier_boxes = Vec::with_capacity(cleaned.len());
        for (id, barrier) in cleaned.iter().enumerate() {
            let start = edges.len();
            match barrier {
                Barrier::Polygon { rings } => {
                    for ring in rings {
                        push_chain(&mut edges, ring, id);
                    }
                }
                Barrier::Polyline { vertices } => push_chain(&mut edges, vertices, id),
            }
            barrier_boxes.push(
                edges[start..]
                    .iter()
                    .fold(BoundingBox::EMPTY, |acc, e| acc.union(&BoundingBox::of_segment(&e.a, &e.b))),
            );
        }
        let index = EdgeIndex::build(edges.iter().map(|e| BoundingBox::of_segment(&e.a, &e.b)).collect());
        let barrier_index = EdgeIndex::build(barrier_boxes.clone());
        Ok(Self {
            barriers: cleaned,
            edges,
            index,
            barrier_boxes,
            barrier_index,
        })
    }

    pub fn barriers(&self) -> &[Barrier] {
        &self.barriers
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Candidate edge ids whose boxes meet `query`.
    pub fn candidate_edges(&self, query: &BoundingBox) -> Vec<usize> {
        let mut out = Vec::new();
        self.index.query(query, &mut out);
        out
    }

    /// Whether the straight segment `p q` is blocked by any barrier.
    ///
    /// Blocked means a proper crossing with an edge, a collinear overlap of
    /// positive length, a pass through an interior vertex of a polyline from
    /// one side to the other, or some interior point of the segment lying
    /// strictly inside a polygon. A single grazing contact is not blocking.
    pub fn segment_blocked(&self, p: &Location, q: &Location) -> Result<bool> {
        p.check_finite()?;
        q.check_finite()?;
        Ok(self.blocked_unchecked(p, q))
    }

    pub(crate) fn blocked_unchecked(&self, p: &Location, q: &Location) -> bool {
        if self.edges.is_empty() || p == q {
            return false;
        }
        let query = BoundingBox::of_segment(p, q);
        let mut cand = Vec::new();
        self.index.query(&query, &mut cand);
        // (barrier, t) touch parameters on polygons
        let mut touches: Vec<(usize, f64)> = Vec::new();
        for &e in &cand {
            let edge = &self.edges[e];
            match classify(p, q, &edge.a, &edge.b) {
                Contact::Disjoint => {}
                Contact::Proper | Contact::Overlap => return true,
                Contact::Touch { t } => match &self.barriers[edge.barrier] {
                    Barrier::Polygon { .. } => touches.push((edge.barrier, t)),
                    Barrier::Polyline { vertices } => {
                        if t > 0.0 && t < 1.0 && self.polyline_pass_through(p, q, edge, vertices) {
                            return true;
                        }
                    }
                },
            }
        }

        let mut polys = Vec::new();
        self.barrier_index.query(&query, &mut polys);
        polys.sort_unstable();
        for id in polys {
            if !matches!(self.barriers[id], Barrier::Polygon { .. }) {
                continue;
            }
            let mut ts: Vec<f64> = touches.iter().filter(|(b, _)| *b == id).map(|&(_, t)| t).collect();
            if ts.is_empty() && !self.barrier_boxes[id].contains(p) {
                // No contact and p outside the box: the whole segment is outside.
                continue;
            }
            ts.push(0.0);
            ts.push(1.0);
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            for w in ts.windows(2) {
                let mid = lerp(p, q, 0.5 * (w[0] + w[1]));
                if self.polygon_containment(id, &mid) == Containment::Inside {
                    return true;
                }
            }
        }
        false
    }

    /// A touch with a polyline edge at an interior vertex blocks if the
    /// polyline continues on both sides of the query line.
    fn polyline_pass_through(&self, p: &Location, q: &Location, edge: &Edge, vertices: &[Location]) -> bool {
        let n = vertices.len();
        let closed = n > 2 && vertices[0] == vertices[n - 1];
        let check = |idx: usize| -> bool {
            let (prev, next) = if idx > 0 && idx < n - 1 {
                (idx - 1, idx + 1)
            } else if closed {
                // first == last: neighbours wrap around
                (n - 2, 1)
            } else {
                return false;
            };
            let s1 = orient(p, q, &vertices[prev]);
            let s2 = orient(p, q, &vertices[next]);
            s1 * s2 < 0
        };
        let mut hit = false;
        if orient(p, q, &edge.a) == 0 && within_closed(p, q, &edge.a) && edge.a != *p && edge.a != *q {
            hit |= check(edge.seq);
        }
        if orient(p, q, &edge.b) == 0 && within_closed(p, q, &edge.b) && edge.b != *p && edge.b != *q {
            hit |= check(edge.seq + 1);
        }
        hit
    }

    fn polygon_containment(&self, id: usize, p: &Location) -> Containment {
        let bx = &self.barrier_boxes[id];
        if !bx.contains(p) {
            return Containment::Outside;
        }
        let ray = BoundingBox {
            min_x: p.x,
            min_y: p.y,
            max_x: bx.max_x,
            max_y: p.y,
        };
        let mut cand = Vec::new();
        self.index.query(&ray, &mut cand);
        let mut inside = false;
        for &e in &cand {
            let edge = &self.edges[e];
            if edge.barrier != id {
                continue;
            }
            let (a, b) = (&edge.a, &edge.b);
            if orient(a, b, p) == 0 && within_closed(a, b, p) {
                return Containment::Boundary;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if x_cross > p.x {
                    inside = !inside;
                }
            }
        }
        if inside {
            Containment::Inside
        } else {
            Containment::Outside
        }
    }

    /// Whether `p` lies in the closed region of any polygon or on any polyline.
    pub fn point_in_barrier(&self, p: &Location) -> Result<bool> {
        p.check_finite()?;
        Ok(self.contains_unchecked(p))
    }

    pub(crate) fn contains_unchecked(&self, p: &Location) -> bool {
        if self.edges.is_empty() {
            return false;
        }
        let point_box = BoundingBox::of_segment(p, p);
        let mut ids = Vec::new();
        self.barrier_index.query(&point_box, &mut ids);
        for id in ids {
            match &self.barriers[id] {
                Barrier::Polygon { .. } => {
                    if self.polygon_containment(id, p) != Containment::Outside {
                        return true;
                    }
                }
                Barrier::Polyline { .. } => {
                    let mut cand = Vec::new();
                    self.index.query(&point_box, &mut cand);
                    if cand.iter().any(|&e| {
                        let edge = &self.edges[e];
                        edge.barrier == id && orient(&edge.a, &edge.b, p) == 0 && within_closed(&edge.a, &edge.b, p)
                    }) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Length of the part of segment `p q` lying strictly inside polygon barriers.
    /// Polylines have zero width and contribute nothing.
    pub fn overlap_length(&self, p: &Location, q: &Location) -> f64 {
        if self.edges.is_empty() || p == q {
            return 0.0;
        }
        let query = BoundingBox::of_segment(p, q);
        let mut cand = Vec::new();
        self.index.query(&query, &mut cand);
        let mut polys = Vec::new();
        self.barrier_index.query(&query, &mut polys);
        polys.sort_unstable();
        let len = p.dist(q);
        let mut total = 0.0;
        for id in polys {
            if !matches!(self.barriers[id], Barrier::Polygon { .. }) {
                continue;
            }
            let mut ts = vec![0.0, 1.0];
            for &e in &cand {
                let edge = &self.edges[e];
                if edge.barrier != id {
                    continue;
                }
                match classify(p, q, &edge.a, &edge.b) {
                    Contact::Proper => ts.push(crossing_param(p, q, &edge.a, &edge.b)),
                    Contact::Touch { t } => ts.push(t),
                    Contact::Overlap => {
                        for v in [&edge.a, &edge.b] {
                            if within_closed(p, q, v) {
                                ts.push(super::predicates::param_on(p, q, v));
                            }
                        }
                    }
                    Contact::Disjoint => {}
                }
            }
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            for w in ts.windows(2) {
                let mid = lerp(p, q, 0.5 * (w[0] + w[1]));
                if self.polygon_containment(id, &mid) == Containment::Inside {
                    total += (w[1] - w[0]) * len;
                }
            }
        }
        total
    }
}

fn lerp(p: &Location, q: &Location, t: f64) -> Location {
    Location::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}

fn push_chain(edges: &mut Vec<Edge>, vertices: &[Location], barrier: usize) {
    for (seq, w) in vertices.windows(2).enumerate() {
        edges.push(Edge {
            a: w[0],
            b: w[1],
            barrier,
            seq,
        });
    }
}

fn drop_repeats(vertices: Vec<Location>) -> Vec<Location> {
    let mut out: Vec<Location> = Vec::with_capacity(vertices.len());
    for v in vertices {
        if out.last() != Some(&v) {
            out.push(v);
        }
    }
    out
}

fn distinct_count(vertices: &[Location]) -> usize {
    let mut keys: Vec<_> = vertices.iter().map(|v| v.key()).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

fn validate_ring(ring: Vec<Location>) -> Result<Vec<Location>> {
    for v in &ring {
        v.check_finite()?;
    }
    if ring.len() < 2 || ring.first() != ring.last() {
        return Err(Error::InvalidRing("ring is not closed (first vertex must equal last)".into()));
    }
    let ring = drop_repeats(ring);
    let distinct = distinct_count(&ring);
    if distinct < 3 {
        return Err(Error::InvalidRing(format!("ring has {distinct} distinct vertices, need at least 3")));
    }
    if let Some((i, j)) = self_intersection(&ring) {
        return Err(Error::InvalidRing(format!("ring self-intersects between edges {i} and {j}")));
    }
    Ok(ring)
}

fn validate_polyline(vertices: Vec<Location>) -> Result<Vec<Location>> {
    for v in &vertices {
        v.check_finite()?;
    }
    let vertices = drop_repeats(vertices);
    if distinct_count(&vertices) < 2 {
        return Err(Error::InvalidRing("polyline needs at least 2 distinct vertices".into()));
    }
    Ok(vertices)
}

/// First pair of offending edges in a closed ring, if any.
fn self_intersection(ring: &[Location]) -> Option<(usize, usize)> {
    let n = ring.len() - 1;
    let boxes: Vec<BoundingBox> = (0..n).map(|i| BoundingBox::of_segment(&ring[i], &ring[i + 1])).collect();
    let mut by_x: Vec<usize> = (0..n).collect();
    by_x.sort_by(|&a, &b| boxes[a].min_x.total_cmp(&boxes[b].min_x));
    for (pos, &i) in by_x.iter().enumerate() {
        for &j in &by_x[pos + 1..] {
            if boxes[j].min_x > boxes[i].max_x {
                break;
            }
            if !boxes[i].intersects(&boxes[j]) {
                continue;
            }
            let (lo, hi) = (i.min(j), i.max(j));
            let adjacent = hi == lo + 1 || (lo == 0 && hi == n - 1);
            let contact = classify(&ring[lo], &ring[lo + 1], &ring[hi], &ring[hi + 1]);
            let bad = if adjacent {
                matches!(contact, Contact::Overlap | Contact::Proper)
            } else {
                contact != Contact::Disjoint
            };
            if bad {
                return Some((lo, hi));
            }
        }
    }
    None
}
