//! Result files: reachability profiles, assignments, dissimilarity matrices,
//! screening tables and JSON reports.
//!
//! Subject ids and cluster labels in files are 1-based (row numbers of the
//! input CSV); the library works with 0-based indices.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use hydap_core::consensus::ConsensusReport;
use hydap_core::density::ReachabilityProfile;
use hydap_core::metrics::BcssScreen;
use hydap_core::{DissimMatrix, Measure};
use serde::Serialize;

use crate::{Error, Result};

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::io("<csv>", e))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Pretty JSON followed by a newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachRow {
    pub position: usize,
    pub subject_id: usize,
    pub reach: Option<f64>,
}

/// `position,subject_id,reach` in processing order; `reach` is empty where
/// undefined (the first point of each component).
pub fn write_reachability<W: Write>(w: W, profile: &ReachabilityProfile) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["position", "subject_id", "reach"])?;
    for (pos, (&s, &r)) in profile.order.iter().zip(&profile.reach).enumerate() {
        w.write_record([(pos + 1).to_string(), (s + 1).to_string(), fmt_opt(r)])?;
    }
    finish(w)
}

pub fn read_reachability<R: Read>(r: R) -> Result<Vec<ReachRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |c: usize| -> Result<&str> {
            rec.get(c).ok_or_else(|| Error::Header("reachability rows need 3 fields".into()))
        };
        let int = |c: usize| -> Result<usize> {
            let t = num(c)?;
            t.parse().map_err(|_| Error::Parse { row: i + 1, col: c + 1, token: t.into() })
        };
        let reach = match num(2)? {
            "" => None,
            t => Some(t.parse().map_err(|_| Error::Parse { row: i + 1, col: 3, token: t.into() })?),
        };
        rows.push(ReachRow {
            position: int(0)?,
            subject_id: int(1)?,
            reach,
        });
    }
    Ok(rows)
}

/// `subject_id,cluster`, both 1-based.
pub fn write_assignments<W: Write>(w: W, assign: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["subject_id", "cluster"])?;
    for (i, &c) in assign.iter().enumerate() {
        w.write_record([(i + 1).to_string(), (c + 1).to_string()])?;
    }
    finish(w)
}

/// Reads `subject_id,cluster` back into 0-based labels ordered by subject.
pub fn read_assignments<R: Read>(r: R) -> Result<Vec<usize>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (i, rec) in rdr.deserialize::<(usize, usize)>().enumerate() {
        let (s, c) = rec?;
        if s == 0 || c == 0 {
            return Err(Error::Parse { row: i + 1, col: 1, token: "0".into() });
        }
        pairs.push((s, c - 1));
    }
    pairs.sort_unstable();
    Ok(pairs.into_iter().map(|p| p.1).collect())
}

/// Square matrix without a header, one row per subject.
pub fn write_matrix_csv<W: Write>(w: W, dm: &DissimMatrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for i in 0..dm.n() {
        w.write_record((0..dm.n()).map(|j| dm.get(i, j).to_string()))?;
    }
    finish(w)
}

pub fn read_matrix_csv<R: Read>(r: R, measure: Measure) -> Result<DissimMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let rows: Vec<Vec<f64>> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
    Ok(DissimMatrix::from_square(&rows, measure)?)
}

pub fn write_hdm1(path: &Path, dm: &DissimMatrix) -> Result<()> {
    fs::write(path, dm.to_hdm1_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_hdm1(path: &Path, measure: Measure) -> Result<DissimMatrix> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(DissimMatrix::from_hdm1_bytes(&bytes, measure)?)
}

/// Ordered BCSS screen: `rank,variable,median,p025,p975,kept`.
pub fn write_bcss_screen<W: Write>(w: W, screen: &BcssScreen) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["rank", "variable", "median", "p025", "p975", "kept"])?;
    for (r, e) in screen.entries.iter().enumerate() {
        w.write_record([
            (r + 1).to_string(),
            e.variable.clone(),
            e.median.to_string(),
            e.p025.to_string(),
            e.p975.to_string(),
            e.kept.to_string(),
        ])?;
    }
    finish(w)
}

/// One row per K: mean and minimum cluster-consensus, then the per-cluster
/// values and sizes separated by `;`.
pub fn write_consensus<W: Write>(w: W, report: &ConsensusReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record([
        "k",
        "mean_consensus",
        "min_consensus",
        "stable",
        "chosen",
        "cluster_consensus",
        "cluster_sizes",
        "unsampled_pairs",
    ])?;
    let join = |v: Vec<String>| v.join(";");
    for s in &report.per_k {
        w.write_record([
            s.k.to_string(),
            s.mean_consensus.to_string(),
            s.min_consensus.to_string(),
            (s.min_consensus >= report.stability_threshold).to_string(),
            (s.k == report.chosen_k).to_string(),
            join(s.cluster_consensus.iter().map(f64::to_string).collect()),
            join(s.cluster_sizes.iter().map(usize::to_string).collect()),
            s.unsampled_pairs.to_string(),
        ])?;
    }
    finish(w)
}
