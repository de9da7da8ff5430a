//! Orientation and segment/segment classification.
//!
//! Orientation signs are snapped to zero when the cross product is below
//! `1e-12` times the product of the two arm lengths, so nearly collinear
//! configurations produced by floating-point noise are treated as collinear.

use super::Location;

const REL_EPS: f64 = 1e-12;

/// Sign of the turn a -> b -> c: +1 counter-clockwise, -1 clockwise, 0 collinear.
#[inline]
pub fn orient(a: &Location, b: &Location, c: &Location) -> i8 {
    let abx = b.x - a.x;
    let aby = b.y - a.y;
    let acx = c.x - a.x;
    let acy = c.y - a.y;
    let cross = abx * acy - aby * acx;
    let scale = (abx.abs() + aby.abs()) * (acx.abs() + acy.abs());
    if cross.abs() <= REL_EPS * scale {
        0
    } else if cross > 0.0 {
        1
    } else {
        -1
    }
}

/// Parameter of `p` along `a -> b`, assuming `p` is collinear with the segment.
#[inline]
pub fn param_on(a: &Location, b: &Location, p: &Location) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    if dx.abs() >= dy.abs() {
        (p.x - a.x) / dx
    } else {
        (p.y - a.y) / dy
    }
}

/// Whether collinear point `p` lies on the closed segment `a b`.
#[inline]
pub fn within_closed(a: &Location, b: &Location, p: &Location) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// How a query segment `p q` meets a barrier edge `a b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Contact {
    /// No common point.
    Disjoint,
    /// The relative interiors cross at a single point.
    Proper,
    /// Collinear with an overlap of positive length.
    Overlap,
    /// A single common point that is an endpoint of at least one segment.
    /// `t` is its parameter along `p -> q`.
    Touch { t: f64 },
}

pub fn classify(p: &Location, q: &Location, a: &Location, b: &Location) -> Contact {
    let o1 = orient(p, q, a);
    let o2 = orient(p, q, b);
    let o3 = orient(a, b, p);
    let o4 = orient(a, b, q);

    if o1 == 0 && o2 == 0 {
        // Collinear (or a degenerate edge lying on the query line).
        let ta = param_on(p, q, a);
        let tb = param_on(p, q, b);
        let lo = ta.min(tb).max(0.0);
        let hi = ta.max(tb).min(1.0);
        return if hi > lo {
            Contact::Overlap
        } else if hi == lo {
            Contact::Touch { t: lo }
        } else {
            Contact::Disjoint
        };
    }

    if o1 * o2 < 0 && o3 * o4 < 0 {
        return Contact::Proper;
    }

    // Any remaining contact is a touch at an endpoint.
    if o1 == 0 && within_closed(p, q, a) {
        return Contact::Touch { t: param_on(p, q, a) };
    }
    if o2 == 0 && within_closed(p, q, b) {
        return Contact::Touch { t: param_on(p, q, b) };
    }
    if o3 == 0 && within_closed(a, b, p) {
        return Contact::Touch { t: 0.0 };
    }
    if o4 == 0 && within_closed(a, b, q) {
        return Contact::Touch { t: 1.0 };
    }
    Contact::Disjoint
}

/// Intersection parameter along `p -> q` of a proper crossing with `a b`.
pub fn crossing_param(p: &Location, q: &Location, a: &Location, b: &Location) -> f64 {
    let rx = q.x - p.x;
    let ry = q.y - p.y;
    let sx = b.x - a.x;
    let sy = b.y - a.y;
    let denom = rx * sy - ry * sx;
    ((a.x - p.x) * sy - (a.y - p.y) * sx) / denom
}
