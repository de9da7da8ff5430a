use std::path::Path;
use std::str::FromStr;

use wkt::Wkt;

use super::{Barrier, BarrierSet, Location};
use crate::error::{Error, Result};

/// Parse barriers from WKT text, one geometry per line (`x y` order).
///
/// Accepts POLYGON, MULTIPOLYGON, LINESTRING and MULTILINESTRING. Blank
/// lines and lines starting with `#` are skipped. Errors carry the 1-based
/// line number.
pub fn parse_barriers_wkt(text: &str) -> Result<BarrierSet> {
    let mut all = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fail = |message: String| Error::BarrierParse { line: i + 1, message };
        let geom = Wkt::<f64>::from_str(line).map_err(|e| fail(e.to_string()))?;
        let barriers = match geom {
            Wkt::Polygon(p) => vec![polygon(p.rings())],
            Wkt::MultiPolygon(mp) => mp.polygons().iter().map(|p| polygon(p.rings())).collect(),
            Wkt::LineString(ls) => vec![Barrier::Polyline { vertices: coords(ls.coords()) }],
            Wkt::MultiLineString(mls) => mls
                .line_strings()
                .iter()
                .map(|ls| Barrier::Polyline { vertices: coords(ls.coords()) })
                .collect(),
            other => return Err(fail(format!("unsupported geometry type {}", type_name(&other)))),
        };
        // Validate this line on its own so errors point at it.
        BarrierSet::new(barriers.clone()).map_err(|e| fail(e.to_string()))?;
        all.extend(barriers);
    }
    BarrierSet::new(all)
}

pub fn read_barriers_wkt(path: impl AsRef<Path>) -> Result<BarrierSet> {
    parse_barriers_wkt(&std::fs::read_to_string(path)?)
}

fn coords(cs: &[wkt::types::Coord<f64>]) -> Vec<Location> {
    cs.iter().map(|c| Location::new(c.x, c.y)).collect()
}

fn polygon(rings: &[wkt::types::LineString<f64>]) -> Barrier {
    Barrier::Polygon {
        rings: rings.iter().map(|r| coords(r.coords())).collect(),
    }
}

fn type_name(g: &Wkt<f64>) -> &'static str {
    match g {
        Wkt::Point(_) => "POINT",
        Wkt::MultiPoint(_) => "MULTIPOINT",
        Wkt::GeometryCollection(_) => "GEOMETRYCOLLECTION",
        Wkt::LineString(_) => "LINESTRING",
        Wkt::Polygon(_) => "POLYGON",
        Wkt::MultiLineString(_) => "MULTILINESTRING",
        Wkt::MultiPolygon(_) => "MULTIPOLYGON",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_geometries() {
        let text = "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))\n\n# fault\nLINESTRING (0 1.35, 1.7 1.35)\n\
                    MULTIPOLYGON (((5 5, 6 5, 6 6, 5 5)), ((8 8, 9 8, 9 9, 8 8)))\n";
        let b = parse_barriers_wkt(text).unwrap();
        assert_eq!(b.barriers().len(), 4);
        assert_eq!(b.edge_count(), 4 + 1 + 3 + 3);
    }

    #[test]
    fn error_has_line_number() {
        let text = "LINESTRING (0 0, 1 1)\nPOLYGON ((0 0, 1 1, 1 0, 0 1, 0 0))\n";
        match parse_barriers_wkt(text) {
            Err(Error::BarrierParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse_barriers_wkt("POINT (1 2)") {
            Err(Error::BarrierParse { line, message }) => {
                assert_eq!(line, 1);
                assert!(message.contains("POINT"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_barriers_wkt("POLYGON ((0 0, 1"),
            Err(Error::BarrierParse { line: 1, .. })
        ));
    }
}
