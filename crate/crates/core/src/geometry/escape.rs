use super::Location;
use crate::error::{Error, Result};

/// Square lattice around an isolated location, scanned nearest-first when
/// looking for a way around the barriers that isolate it.
#[derive(Clone, Debug, PartialEq)]
pub struct EscapeGrid {
    pub center: Location,
    pub half_length: f64,
    pub step: f64,
    pub points: Vec<Location>,
}

/// Build the lattice for `center` from its blocked nearest neighbors.
///
/// `crossing_neighbors` pairs each blocked neighbor with the length of the
/// straight line to it that overlaps the barriers. The half length is the
/// largest neighbor distance and the step the smallest overlap.
pub fn build_escape_grid(center: Location, crossing_neighbors: &[(Location, f64)]) -> Result<EscapeGrid> {
    center.check_finite()?;
    if crossing_neighbors.is_empty() {
        return Err(Error::EmptyNeighborInfo);
    }
    let mut half_length = 0.0f64;
    let mut step = f64::INFINITY;
    for (loc, overlap) in crossing_neighbors {
        loc.check_finite()?;
        if !overlap.is_finite() || *overlap <= 0.0 {
            return Err(Error::NonFinite(format!("overlap length {overlap} must be positive and finite")));
        }
        half_length = half_length.max(center.dist(loc));
        step = step.min(*overlap);
    }
    let step = step.min(half_length);
    let n = (half_length / step + 1e-9).floor() as i64;
    let mut cells: Vec<(f64, i64, i64)> = Vec::with_capacity(((2 * n + 1) * (2 * n + 1)) as usize);
    for i in -n..=n {
        for j in -n..=n {
            let dx = i as f64 * step;
            let dy = j as f64 * step;
            cells.push((dx * dx + dy * dy, i, j));
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let points = cells
        .into_iter()
        .map(|(_, i, j)| Location::new(center.x + i as f64 * step, center.y + j as f64 * step))
        .collect();
    Ok(EscapeGrid {
        center,
        half_length,
        step,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eleven_by_eleven() {
        let g = build_escape_grid(Location::new(0., 0.), &[(Location::new(3., 4.), 1.0)]).unwrap();
        assert_eq!(g.half_length, 5.0);
        assert_eq!(g.step, 1.0);
        assert_eq!(g.points.len(), 121);
        assert_eq!(g.points[0], Location::new(0., 0.));
        // brute-force enumeration of the same lattice
        let mut want: Vec<(i32, i32)> = (-5..=5).flat_map(|i| (-5..=5).map(move |j| (i, j))).collect();
        want.sort_by_key(|&(i, j)| (i * i + j * j, i, j));
        let got: Vec<(i32, i32)> = g.points.iter().map(|p| (p.x as i32, p.y as i32)).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn max_and_min() {
        let g = build_escape_grid(
            Location::new(0., 0.),
            &[(Location::new(2., 0.), 0.5), (Location::new(0., 6.), 1.5)],
        )
        .unwrap();
        assert_eq!(g.half_length, 6.0);
        assert_eq!(g.step, 0.5);
    }

    #[test]
    fn empty_neighbors() {
        assert!(matches!(
            build_escape_grid(Location::new(0., 0.), &[]),
            Err(Error::EmptyNeighborInfo)
        ));
    }

    #[test]
    fn points_sorted_and_inside_square() {
        let c = Location::new(1.3, -0.7);
        let g = build_escape_grid(c, &[(Location::new(2.0, 0.1), 0.13), (Location::new(0.0, 0.0), 0.4)]).unwrap();
        for w in g.points.windows(2) {
            assert!(c.dist(&w[0]) <= c.dist(&w[1]) + 1e-12);
        }
        for p in &g.points {
            assert!((p.x - c.x).abs() <= g.half_length + 1e-9);
            assert!((p.y - c.y).abs() <= g.half_length + 1e-9);
        }
    }
}
