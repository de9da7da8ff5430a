//! Planar geometry: locations, barriers and the visibility predicates the
//! neighbor search is built on.

mod barrier;
mod bvh;
mod escape;
pub mod predicates;
mod wkt_io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use barrier::{Barrier, BarrierSet, Edge};
pub use bvh::{BoundingBox, EdgeIndex};
pub use escape::{build_escape_grid, EscapeGrid};
pub use wkt_io::{parse_barriers_wkt, read_barriers_wkt};

/// A point in projected planar coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Location {
    pub x: f64,
    pub y: f64,
}

impl Location {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Construct a location, rejecting NaN and infinite coordinates.
    pub fn try_new(x: f64, y: f64) -> Result<Self> {
        let loc = Self { x, y };
        loc.check_finite()?;
        Ok(loc)
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.x.is_finite() && self.y.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(format!("({}, {})", self.x, self.y)))
        }
    }

    #[inline]
    pub fn dist2(&self, other: &Location) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(&self, other: &Location) -> f64 {
        self.dist2(other).sqrt()
    }

    /// Bit pattern used as a hash key for memoisation (`-0.0` maps to `0.0`).
    pub fn key(&self) -> (u64, u64) {
        ((self.x + 0.0).to_bits(), (self.y + 0.0).to_bits())
    }
}

impl From<(f64, f64)> for Location {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}
