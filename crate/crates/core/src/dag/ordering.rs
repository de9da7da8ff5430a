use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::Location;

/// How reference locations are ordered before the DAG is built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderStrategy {
    ByX,
    ByY,
    BySum,
    /// Decreasing product of the two coordinates.
    ByProductDesc,
    /// Visit order given explicitly as original indices.
    Explicit(Vec<usize>),
}

impl fmt::Display for OrderStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrderStrategy::ByX => "x",
            OrderStrategy::ByY => "y",
            OrderStrategy::BySum => "sum",
            OrderStrategy::ByProductDesc => "product-desc",
            OrderStrategy::Explicit(_) => "file",
        })
    }
}

impl FromStr for OrderStrategy {
    type Err = Error;

    /// Parses the named strategies; `file` needs a permutation and is handled by the caller.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(OrderStrategy::ByX),
            "y" => Ok(OrderStrategy::ByY),
            "sum" => Ok(OrderStrategy::BySum),
            "product-desc" => Ok(OrderStrategy::ByProductDesc),
            other => Err(Error::InvalidConfig(format!("unknown ordering '{other}'"))),
        }
    }
}

/// A permutation of the reference set: `permutation[i]` is the original
/// index of the i-th visited location.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ordering {
    pub strategy: OrderStrategy,
    pub permutation: Vec<usize>,
}

impl Ordering {
    pub fn identity(k: usize) -> Self {
        Ordering {
            strategy: OrderStrategy::Explicit((0..k).collect()),
            permutation: (0..k).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }

    /// Reorder `items` (given in original order) into visit order.
    pub fn apply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        self.permutation.iter().map(|&i| items[i].clone()).collect()
    }

    /// `inverse()[original] = position in visit order`.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.permutation.len()];
        for (pos, &orig) in self.permutation.iter().enumerate() {
            inv[orig] = pos;
        }
        inv
    }
}

/// Compute the visit order of `locations` under `strategy`. Ties keep the
/// original relative order.
pub fn order_reference(locations: &[Location], strategy: OrderStrategy) -> Result<Ordering> {
    for loc in locations {
        loc.check_finite()?;
    }
    let k = locations.len();
    let permutation = match &strategy {
        OrderStrategy::Explicit(p) => {
            check_permutation(p, k)?;
            p.clone()
        }
        s => {
            let key = |l: &Location| match s {
                OrderStrategy::ByX => l.x,
                OrderStrategy::ByY => l.y,
                OrderStrategy::BySum => l.x + l.y,
                OrderStrategy::ByProductDesc => -(l.x * l.y),
                OrderStrategy::Explicit(_) => unreachable!(),
            };
            let mut idx: Vec<usize> = (0..k).collect();
            idx.sort_by(|&a, &b| key(&locations[a]).total_cmp(&key(&locations[b])));
            idx
        }
    };
    Ok(Ordering { strategy, permutation })
}

fn check_permutation(p: &[usize], k: usize) -> Result<()> {
    if p.len() != k {
        return Err(Error::InvalidPermutation(format!("length {} for {} locations", p.len(), k)));
    }
    let mut seen = vec![false; k];
    for &i in p {
        if i >= k {
            return Err(Error::InvalidPermutation(format!("index {i} out of range")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidPermutation(format!("index {i} repeated")));
        }
    }
    Ok(())
}
