use std::fs;
use std::io::Read;
use std::path::Path;

use crate::data::Label;
use crate::error::{Error, Result};
use crate::taskgen::InvPoint;

#[derive(Debug, Clone, PartialEq)]
pub struct Tabular {
    pub columns: Vec<String>,
    pub points: Vec<InvPoint>,
    /// Per-feature `(min, max)` before rescaling.
    pub ranges: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

pub fn load_csv_tabular(path: &Path, label_column: &str, scale_to_unit: bool) -> Result<Tabular> {
    read_csv_tabular(fs::File::open(path)?, label_column, scale_to_unit)
}

/// Reads a headed numeric CSV. Labels `1` map to `+1`; `-1` and `0` map to
/// `-1`. With `scale_to_unit`, every feature is mapped affinely onto
/// `[-1, 1]`; a constant feature becomes 0 with a warning.
pub fn read_csv_tabular<R: Read>(input: R, label_column: &str, scale_to_unit: bool) -> Result<Tabular> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let label_idx = header
        .iter()
        .position(|h| h.trim() == label_column)
        .ok_or_else(|| Error::Parse(format!("no column named `{label_column}`")))?;
    let columns: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.trim().to_string())
        .collect();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut row = Vec::with_capacity(columns.len());
        for (i, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("row {}, column {}: `{cell}` is not a number", line + 1, i + 1)))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("row {}: non-finite value", line + 1)));
            }
            if i == label_idx {
                labels.push(match v {
                    1.0 => Label::Pos,
                    -1.0 | 0.0 => Label::Neg,
                    _ => return Err(Error::Parse(format!("row {}: label {v} is not 1, -1 or 0", line + 1))),
                });
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidDataset("tabular file has no rows".into()));
    }

    let dims = columns.len();
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); dims];
    for row in &rows {
        for (r, v) in ranges.iter_mut().zip(row) {
            r.0 = r.0.min(*v);
            r.1 = r.1.max(*v);
        }
    }
    let mut warnings = Vec::new();
    if scale_to_unit {
        for (k, &(lo, hi)) in ranges.iter().enumerate() {
            if lo == hi {
                warnings.push(format!("column `{}` is constant ({lo}); mapped to 0", columns[k]));
            }
        }
        for row in &mut rows {
            for (v, &(lo, hi)) in row.iter_mut().zip(&ranges) {
                *v = if lo == hi {
                    0.0
                } else {
                    2.0 * (*v - lo) / (hi - lo) - 1.0
                };
            }
        }
    }
    Ok(Tabular {
        columns,
        points: rows.into_iter().zip(labels).collect(),
        ranges,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescales_to_unit_interval() {
        let t = read_csv_tabular("a,y,b\n0,1,3\n10,-1,3\n".as_bytes(), "y", true).unwrap();
        assert_eq!(t.columns, vec!["a", "b"]);
        assert_eq!(t.points[0], (vec![-1.0, 0.0], Label::Pos));
        assert_eq!(t.points[1], (vec![1.0, 0.0], Label::Neg));
        assert_eq!(t.ranges, vec![(0.0, 10.0), (3.0, 3.0)]);
        assert_eq!(t.warnings.len(), 1);
    }

    #[test]
    fn raw_values_without_scaling() {
        let t = read_csv_tabular("y,a\n0,2.5\n1,-7\n".as_bytes(), "y", false).unwrap();
        assert_eq!(t.points[0], (vec![2.5], Label::Neg));
        assert_eq!(t.points[1], (vec![-7.0], Label::Pos));
        assert!(t.warnings.is_empty());
    }

    #[test]
    fn errors() {
        assert!(read_csv_tabular("y,a\n1,x\n".as_bytes(), "y", true).is_err());
        assert!(read_csv_tabular("y,a\n2,1\n".as_bytes(), "y", true).is_err());
        assert!(read_csv_tabular("y,a\n1,1\n".as_bytes(), "label", true).is_err());
        assert!(read_csv_tabular("y,a\n".as_bytes(), "y", true).is_err());
    }
}
