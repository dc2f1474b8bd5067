//! Agreement, association and sum-of-squares statistics.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::RowMatrix;
use crate::error::{Error, Result};
use crate::math::{choose2, median, percentile};
use crate::partition::{sparse_kmeans_with, SparseConfig};
use crate::{par, rng};

/// Cross-tabulation of two labelings.
#[derive(Debug, Clone, PartialEq)]
pub struct Contingency {
    pub cells: Vec<Vec<usize>>,
    pub row_totals: Vec<usize>,
    pub col_totals: Vec<usize>,
    pub n: usize,
}

fn compact<T: Ord + Copy>(labels: &[T]) -> (Vec<usize>, usize) {
    let mut levels: Vec<T> = labels.to_vec();
    levels.sort_unstable();
    levels.dedup();
    let idx = labels
        .iter()
        .map(|l| levels.binary_search(l).expect("present"))
        .collect();
    (idx, levels.len())
}

impl Contingency {
    /// Tabulates two labelings; only observed levels get a row or column.
    pub fn new<A: Ord + Copy, B: Ord + Copy>(a: &[A], b: &[B]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch(a.len(), b.len()));
        }
        let (ai, r) = compact(a);
        let (bi, c) = compact(b);
        let mut cells = vec![vec![0; c]; r];
        for (&x, &y) in ai.iter().zip(&bi) {
            cells[x][y] += 1;
        }
        let row_totals = cells.iter().map(|row| row.iter().sum()).collect();
        let col_totals = (0..c).map(|j| cells.iter().map(|row| row[j]).sum()).collect();
        Ok(Self {
            cells,
            row_totals,
            col_totals,
            n: a.len(),
        })
    }

    pub fn chi_square(&self) -> f64 {
        let n = self.n as f64;
        let mut chi = 0.0;
        for (i, row) in self.cells.iter().enumerate() {
            for (j, &o) in row.iter().enumerate() {
                let e = self.row_totals[i] as f64 * self.col_totals[j] as f64 / n;
                chi += (o as f64 - e) * (o as f64 - e) / e;
            }
        }
        chi
    }
}

/// Hubert–Arabie adjusted Rand index.
pub fn ari<A: Ord + Copy, B: Ord + Copy>(a: &[A], b: &[B]) -> Result<f64> {
    let t = Contingency::new(a, b)?;
    let index: f64 = t.cells.iter().flatten().map(|&c| choose2(c as f64)).sum();
    let sa: f64 = t.row_totals.iter().map(|&c| choose2(c as f64)).sum();
    let sb: f64 = t.col_totals.iter().map(|&c| choose2(c as f64)).sum();
    let total = choose2(t.n as f64);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sa * sb / total;
    let max = 0.5 * (sa + sb);
    if max == expected {
        // both partitions trivial in the same way (e.g. one cluster each)
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Cramér's V without bias correction.
pub fn cramers_v<A: Ord + Copy, B: Ord + Copy>(a: &[A], b: &[B]) -> Result<f64> {
    let t = Contingency::new(a, b)?;
    let r = t.row_totals.len();
    let c = t.col_totals.len();
    if r < 2 || c < 2 {
        return Err(Error::DegenerateTable);
    }
    let denom = t.n as f64 * (r.min(c) - 1) as f64;
    Ok(libm::sqrt(t.chi_square() / denom).min(1.0))
}

/// Per-variable within- and between-cluster sums of squares for labels in
/// `0..k`.
pub fn variable_ss(data: &RowMatrix, assign: &[usize], k: usize) -> (Vec<f64>, Vec<f64>) {
    let (n, h) = (data.rows(), data.cols());
    let mut counts = vec![0usize; k];
    let mut sums = RowMatrix::zeros(k, h);
    let mut total = vec![0.0; h];
    for i in 0..n {
        counts[assign[i]] += 1;
        for (j, v) in data.row(i).iter().enumerate() {
            sums.row_mut(assign[i])[j] += v;
            total[j] += v;
        }
    }
    let grand: Vec<f64> = total.iter().map(|t| t / n as f64).collect();
    let mut wcss = vec![0.0; h];
    for i in 0..n {
        let c = assign[i];
        for (j, v) in data.row(i).iter().enumerate() {
            let d = v - sums.get(c, j) / counts[c] as f64;
            wcss[j] += d * d;
        }
    }
    let mut bcss = vec![0.0; h];
    for c in 0..k {
        if counts[c] == 0 {
            continue;
        }
        for j in 0..h {
            let d = sums.get(c, j) / counts[c] as f64 - grand[j];
            bcss[j] += counts[c] as f64 * d * d;
        }
    }
    (wcss, bcss)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumsOfSquares {
    pub wcss: Vec<f64>,
    pub bcss: Vec<f64>,
    pub tss: Vec<f64>,
    pub total_wcss: f64,
    pub total_bcss: f64,
}

pub fn wcss_bcss(data: &RowMatrix, assign: &[usize]) -> Result<SumsOfSquares> {
    if assign.len() != data.rows() {
        return Err(Error::LengthMismatch(assign.len(), data.rows()));
    }
    let k = assign.iter().max().map_or(0, |m| m + 1);
    let (wcss, bcss) = variable_ss(data, assign, k);
    let tss = (0..data.cols())
        .map(|j| {
            let c = data.column(j);
            let m = crate::math::mean(&c);
            c.iter().map(|v| (v - m) * (v - m)).sum()
        })
        .collect();
    Ok(SumsOfSquares {
        total_wcss: wcss.iter().sum(),
        total_bcss: bcss.iter().sum(),
        wcss,
        bcss,
        tss,
    })
}

/// K at the largest second difference of `objective` over interior points;
/// ties go to the smaller K.
pub fn elbow(ks: &[usize], objective: &[f64]) -> Result<usize> {
    if ks.len() != objective.len() {
        return Err(Error::LengthMismatch(ks.len(), objective.len()));
    }
    if ks.len() < 3 {
        return Err(Error::TooShort {
            got: ks.len(),
            required: 3,
        });
    }
    let mut best = (ks[1], f64::NEG_INFINITY);
    for i in 1..ks.len() - 1 {
        let d2 = objective[i - 1] - 2.0 * objective[i] + objective[i + 1];
        if d2 > best.1 + 1e-12 * objective[i - 1].abs().max(1.0) {
            best = (ks[i], d2);
        }
    }
    Ok(best.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcssEntry {
    pub variable: String,
    pub median: f64,
    pub p025: f64,
    pub p975: f64,
    pub kept: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcssScreen {
    /// Ordered by decreasing median BCSS.
    pub entries: Vec<BcssEntry>,
    pub kept: Vec<String>,
}

/// Bootstrap screen: sparse K-means on `boots` resamples, per-variable BCSS
/// recorded; variables below the largest relative gap in the ordered medians
/// are dropped, unless that gap is under twice the median gap.
pub fn bootstrap_bcss_screen(
    data: &RowMatrix,
    names: &[String],
    k: usize,
    s: f64,
    boots: usize,
    seed: u64,
) -> Result<BcssScreen> {
    if boots < 10 {
        return Err(Error::InvalidParameter(alloc::format!(
            "bootstrap screen needs at least 10 replicates, got {boots}"
        )));
    }
    if names.len() != data.cols() {
        return Err(Error::LengthMismatch(names.len(), data.cols()));
    }
    let n = data.rows();
    let cfg = SparseConfig::default();
    let reps: Vec<Result<Vec<f64>>> = par::map_range(boots, |b| {
        let mut g = rng::stream(seed, b as u64);
        let idx: Vec<usize> = (0..n).map(|_| g.random_range(0..n)).collect();
        let sample = data.select_rows(&idx);
        let fit = sparse_kmeans_with(&sample, k, s, rng::derive_seed(seed, b as u64), &cfg)?;
        Ok(variable_ss(&sample, &fit.assign, k).1)
    });
    let reps: Vec<Vec<f64>> = reps.into_iter().collect::<Result<_>>()?;
    let h = data.cols();
    let mut entries: Vec<BcssEntry> = (0..h)
        .map(|j| {
            let vals: Vec<f64> = reps.iter().map(|r| r[j]).collect();
            BcssEntry {
                variable: names[j].clone(),
                median: median(&vals),
                p025: percentile(&vals, 0.025),
                p975: percentile(&vals, 0.975),
                kept: true,
            }
        })
        .collect();
    entries.sort_by(|a, b| b.median.total_cmp(&a.median));
    let cut = gap_cut(&entries.iter().map(|e| e.median).collect::<Vec<_>>());
    for e in entries.iter_mut().skip(cut) {
        e.kept = false;
    }
    let kept = entries.iter().filter(|e| e.kept).map(|e| e.variable.clone()).collect();
    Ok(BcssScreen { entries, kept })
}

/// Number of leading values kept from a decreasing sequence.
pub(crate) fn gap_cut(sorted_desc: &[f64]) -> usize {
    let m = sorted_desc.len();
    if m < 2 {
        return m;
    }
    let scale = sorted_desc[0].abs().max(f64::MIN_POSITIVE);
    let gaps: Vec<f64> = sorted_desc.windows(2).map(|w| (w[0] - w[1]) / scale).collect();
    let mut best = 0;
    for (i, &g) in gaps.iter().enumerate() {
        if g > gaps[best] {
            best = i;
        }
    }
    if gaps[best] < 2.0 * median(&gaps) || gaps[best] <= 0.0 {
        return m;
    }
    best + 1
}
