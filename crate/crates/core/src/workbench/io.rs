use std::collections::HashSet;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::geometry::Location;
use crate::inference::Dataset;

/// Points read from CSV with header `x,y[,value][,cov1,...]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointTable {
    pub locations: Vec<Location>,
    pub values: Option<Vec<f64>>,
    pub covariates: Vec<Vec<f64>>,
    /// Row numbers (1-based, excluding the header) dropped as exact
    /// duplicates of an earlier location.
    pub dropped: Vec<usize>,
}

impl PointTable {
    pub fn into_dataset(self) -> Result<Dataset> {
        let values = self
            .values
            .ok_or_else(|| Error::Parse("point file has no `value` column".into()))?;
        Dataset::new(self.locations, values, self.covariates)
    }
}

/// Read points, keeping the first of any exactly repeated location.
pub fn read_points_csv<R: Read>(reader: R) -> Result<PointTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() < 2 || &header[0] != "x" || &header[1] != "y" {
        return Err(Error::Parse("point file header must start with `x,y`".into()));
    }
    let has_value = header.get(2) == Some("value");
    let first_cov = if has_value { 3 } else { 2 };
    let mut out = PointTable {
        locations: Vec::new(),
        values: has_value.then(Vec::new),
        covariates: Vec::new(),
        dropped: Vec::new(),
    };
    let mut seen = HashSet::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |j: usize| -> Result<f64> {
            let s = rec.get(j).unwrap_or("");
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("row {}: column {} is not a number: {s:?}", row + 1, j + 1)))
        };
        let loc = Location::try_new(num(0)?, num(1)?)?;
        if !seen.insert(loc.key()) {
            log::warn!("row {}: duplicate location ({}, {}) dropped", row + 1, loc.x, loc.y);
            out.dropped.push(row + 1);
            continue;
        }
        out.locations.push(loc);
        if let Some(v) = out.values.as_mut() {
            v.push(num(2)?);
        }
        out.covariates
            .push((first_cov..header.len()).map(num).collect::<Result<Vec<f64>>>()?);
    }
    Ok(out)
}

/// Write `x,y,value[,cov1,...]` rows.
pub fn write_points_csv<W: Write>(data: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["x".to_string(), "y".to_string(), "value".to_string()];
    header.extend((1..=data.p()).map(|j| format!("cov{j}")));
    w.write_record(&header)?;
    for i in 0..data.len() {
        let l = data.locations[i];
        let mut row = vec![l.x.to_string(), l.y.to_string(), data.response[i].to_string()];
        row.extend(data.covariates[i].iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_values_covariates_and_drops_duplicates() {
        let text = "x,y,value,cov1\n0,0,1.5,2\n1,0,2.5,3\n0,0,9,9\n";
        let t = read_points_csv(text.as_bytes()).unwrap();
        assert_eq!(t.locations.len(), 2);
        assert_eq!(t.values, Some(vec![1.5, 2.5]));
        assert_eq!(t.covariates, vec![vec![2.0], vec![3.0]]);
        assert_eq!(t.dropped, vec![3]);
        let d = t.into_dataset().unwrap();
        let mut buf = Vec::new();
        write_points_csv(&d, &mut buf).unwrap();
        let back = read_points_csv(&buf[..]).unwrap().into_dataset().unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn sites_without_values() {
        let t = read_points_csv("x,y\n0.5,0.25\n".as_bytes()).unwrap();
        assert_eq!(t.values, None);
        assert_eq!(t.covariates, vec![Vec::<f64>::new()]);
        assert!(t.into_dataset().is_err());
    }

    #[test]
    fn bad_input() {
        assert!(read_points_csv("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_points_csv("x,y\n1,oops\n".as_bytes()).is_err());
        assert!(read_points_csv("x,y\n1,NaN\n".as_bytes()).is_err());
    }
}
