//! CSV ingestion and export of mixed datasets.
//!
//! One header row whose names must equal the schema names in order; quoted
//! fields are allowed. Empty and `NA` cells are rejected: the algorithms have
//! no notion of a missing value and silently imputing would skew every
//! comparison.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use hydap_core::{MixedDataset, VariableMeta};

use crate::{Error, Result};

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "NA"
}

pub fn read_csv<R: Read>(reader: R, schema: &[VariableMeta]) -> Result<MixedDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let expected: Vec<&str> = schema.iter().map(|m| m.name.as_str()).collect();
    if header != expected {
        return Err(Error::Header(format!(
            "file has [{}], schema expects [{}]",
            header.join(", "),
            expected.join(", ")
        )));
    }

    let mut continuous: Vec<Vec<f64>> = Vec::new();
    let mut categorical: Vec<Vec<u32>> = Vec::new();
    // (is_categorical, index into its block)
    let slots: Vec<(bool, usize)> = schema
        .iter()
        .scan((0, 0), |(c, k), m| {
            Some(if m.kind.is_categorical() {
                *k += 1;
                (true, *k - 1)
            } else {
                *c += 1;
                (false, *c - 1)
            })
        })
        .collect();
    continuous.resize(slots.iter().filter(|s| !s.0).count(), Vec::new());
    categorical.resize(slots.iter().filter(|s| s.0).count(), Vec::new());

    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        for (c, (cell, (meta, &(cat, idx)))) in record.iter().zip(schema.iter().zip(&slots)).enumerate() {
            let col = c + 1;
            if is_missing(cell) {
                return Err(Error::MissingValue { row, col });
            }
            if cat {
                let level = meta.level_index(cell).ok_or_else(|| Error::UnknownLevel {
                    row,
                    col,
                    token: cell.to_owned(),
                })?;
                categorical[idx].push(level);
            } else {
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => continuous[idx].push(v),
                    _ => {
                        return Err(Error::Parse {
                            row,
                            col,
                            token: cell.to_owned(),
                        })
                    }
                }
            }
        }
    }
    Ok(MixedDataset::new(schema.to_vec(), continuous, categorical)?)
}

pub fn load_csv(path: &Path, schema: &[VariableMeta]) -> Result<MixedDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

/// Writes the dataset back in schema order. Continuous values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_csv<W: Write>(writer: W, ds: &MixedDataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ds.meta().iter().map(|m| m.name.as_str()))?;
    let mut record: Vec<String> = Vec::with_capacity(ds.p());
    for i in 0..ds.n() {
        record.clear();
        let (mut c, mut k) = (0, 0);
        for m in ds.meta() {
            if m.kind.is_categorical() {
                record.push(m.levels[ds.categorical()[k][i] as usize].clone());
                k += 1;
            } else {
                record.push(ds.continuous()[c][i].to_string());
                c += 1;
            }
        }
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn save_csv(path: &Path, ds: &MixedDataset) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(file, ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Vec<VariableMeta> {
        vec![
            VariableMeta::continuous("x"),
            VariableMeta::asymmetric_binary("b", &["no", "yes"], "yes"),
        ]
    }

    #[test]
    fn three_rows() {
        let ds = read_csv("x,b\n1.5,no\n-2,yes\n3e2,\"no\"\n".as_bytes(), &schema()).unwrap();
        assert_eq!((ds.n(), ds.h(), ds.p()), (3, 1, 2));
        assert_eq!(ds.continuous()[0], vec![1.5, -2.0, 300.0]);
        assert_eq!(ds.categorical()[0], vec![0, 1, 0]);
    }

    #[test]
    fn rejections() {
        let s = schema();
        assert!(matches!(
            read_csv("x,b\n1,no\nNA,yes\n".as_bytes(), &s),
            Err(Error::MissingValue { row: 2, col: 1 })
        ));
        assert!(matches!(
            read_csv("x,b\n1,\n".as_bytes(), &s),
            Err(Error::MissingValue { row: 1, col: 2 })
        ));
        match read_csv("x,b\n1,maybe\n".as_bytes(), &s) {
            Err(Error::UnknownLevel { row: 1, col: 2, token }) => assert_eq!(token, "maybe"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_csv("x,b\nabc,no\n".as_bytes(), &s), Err(Error::Parse { .. })));
        assert!(matches!(read_csv("x,b\ninf,no\n".as_bytes(), &s), Err(Error::Parse { .. })));
        assert!(matches!(read_csv("b,x\nno,1\n".as_bytes(), &s), Err(Error::Header(_))));
    }

    #[test]
    fn levels_follow_schema_order() {
        let s = vec![VariableMeta::categorical("c", &["z", "a"])];
        let ds = read_csv("c\na\nz\n".as_bytes(), &s).unwrap();
        assert_eq!(ds.categorical()[0], vec![1, 0]);
    }

    #[test]
    fn roundtrip_is_exact() {
        let src = "x,b\n0.1,no\n-123456.789012345,yes\n1e-300,no\n";
        let ds = read_csv(src.as_bytes(), &schema()).unwrap();
        let mut out = Vec::new();
        write_csv(&mut out, &ds).unwrap();
        let back = read_csv(out.as_slice(), &schema()).unwrap();
        assert_eq!(back, ds);
    }
}
