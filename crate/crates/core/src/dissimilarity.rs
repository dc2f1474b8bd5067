//! Pairwise dissimilarity measures and the dissimilarity-matrix container.
//!
//! Besides the classical measures (Minkowski, simple matching, Gower with
//! asymmetric binaries, the FAMD distance and the K-prototypes mixed
//! distance) this module builds the HyDaP dissimilarity: every Gower
//! per-variable term is divided by that variable's total dissimilarity over
//! all unordered subject pairs, so each variable contributes the same
//! aggregate amount.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::MixedDataset;
use crate::error::{Error, Result};
use crate::par;

/// Producer tag carried by a [`DissimMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Gower,
    Hydap,
    Famd,
    /// FAMD metric as the factor analysis applies it; see [`famd_factor_matrix`].
    FamdFactor,
    Euclidean,
    Manhattan,
    /// One minus a consensus matrix.
    ConsensusComplement,
    Custom,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Gower => "gower",
            Measure::Hydap => "hydap",
            Measure::Famd => "famd",
            Measure::FamdFactor => "famd_factor",
            Measure::Euclidean => "euclidean",
            Measure::Manhattan => "manhattan",
            Measure::ConsensusComplement => "consensus_complement",
            Measure::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "gower" => Measure::Gower,
            "hydap" => Measure::Hydap,
            "famd" => Measure::Famd,
            "famd_factor" => Measure::FamdFactor,
            "euclidean" => Measure::Euclidean,
            "manhattan" => Measure::Manhattan,
            _ => return None,
        })
    }
}

/// Symmetric n x n dissimilarity matrix with zero diagonal, stored as the
/// row-major upper triangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissimMatrix {
    n: usize,
    values: Vec<f64>,
    measure: Measure,
}

const HDM_MAGIC: &[u8; 4] = b"HDM1";

impl DissimMatrix {
    /// Fills the matrix from a pair function evaluated for `i < j`. Rows are
    /// computed in parallel; each entry is a pure function of `(i, j)`.
    pub fn from_fn<F>(n: usize, measure: Measure, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync + Send,
    {
        let rows: Vec<Vec<f64>> =
            par::map_range(n, |i| ((i + 1)..n).map(|j| f(i, j)).collect());
        let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for r in rows {
            values.extend(r);
        }
        Self { n, values, measure }
    }

    /// Builds from the condensed upper triangle.
    pub fn from_condensed(n: usize, values: Vec<f64>, measure: Measure) -> Result<Self> {
        if values.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::DimensionMismatch {
                left: values.len(),
                right: n * n.saturating_sub(1) / 2,
            });
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Format("entries must be finite and nonnegative".into()));
        }
        Ok(Self { n, values, measure })
    }

    /// Builds from a full square matrix, which must be symmetric.
    pub fn from_square(rows: &[Vec<f64>], measure: Measure) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::DimensionMismatch { left: r.len(), right: n });
            }
            for j in (i + 1)..n {
                if (r[j] - rows[j][i]).abs() > 1e-12 * (1.0 + r[j].abs()) {
                    return Err(Error::Format("matrix is not symmetric".into()));
                }
                values.push(r[j]);
            }
        }
        Self::from_condensed(n, values, measure)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    /// Condensed upper triangle, row-major.
    pub fn condensed(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        use core::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => 0.0,
            Less => self.values[self.index(i, j)],
            Greater => self.values[self.index(j, i)],
        }
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.n).map(|j| self.get(i, j)).collect()
    }

    /// Uniformly rescaled copy.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|v| v * factor).collect(),
            measure: self.measure,
        }
    }

    /// Copy with subjects reordered: entry (a, b) of the result is entry
    /// (perm[a], perm[b]) of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self::from_fn(self.n, self.measure, |a, b| self.get(perm[a], perm[b]))
    }

    /// Compact binary layout: magic `HDM1`, little-endian u64 `n`, then the
    /// n(n-1)/2 upper-triangle values as little-endian f64, row-major.
    pub fn to_hdm1_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 8 * self.values.len());
        out.extend_from_slice(HDM_MAGIC);
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_hdm1_bytes(bytes: &[u8], measure: Measure) -> Result<Self> {
        if bytes.len() < 12 || &bytes[..4] != HDM_MAGIC {
            return Err(Error::Format("missing HDM1 header".into()));
        }
        let n = u64::from_le_bytes(bytes[4..12].try_into().expect("8 bytes")) as usize;
        let m = n * n.saturating_sub(1) / 2;
        let body = &bytes[12..];
        if body.len() != 8 * m {
            return Err(Error::Format(alloc::format!(
                "expected {} payload bytes for n={}, found {}",
                8 * m,
                n,
                body.len()
            )));
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Self::from_condensed(n, values, measure)
    }
}

/// Minkowski distance of order `m >= 1`.
pub fn minkowski(a: &[f64], b: &[f64], m: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if !(m >= 1.0) {
        return Err(Error::InvalidOrder(m));
    }
    if m == 1.0 {
        return Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum());
    }
    if m == 2.0 {
        return Ok(libm::sqrt(crate::dataset::sq_dist(a, b)));
    }
    let s: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| libm::pow((x - y).abs(), m))
        .sum();
    Ok(libm::pow(s, 1.0 / m))
}

/// Number of positions where two level-index vectors disagree.
pub fn simple_matching(a: &[u32], b: &[u32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count() as f64)
}

/// Per-variable normalizers for Gower-type measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GowerConfig {
    /// Observed range of each continuous variable.
    pub ranges: Vec<f64>,
    /// Positive level for asymmetric binaries, per categorical variable.
    pub positive: Vec<Option<u32>>,
}

impl GowerConfig {
    pub fn from_dataset(ds: &MixedDataset) -> Self {
        let ranges = ds
            .continuous()
            .iter()
            .map(|c| {
                let (lo, hi) = c
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    });
                if c.is_empty() {
                    0.0
                } else {
                    hi - lo
                }
            })
            .collect();
        let positive = ds
            .categorical_meta()
            .map(|m| match m.kind {
                crate::VarKind::AsymmetricBinary => m.positive_index(),
                _ => None,
            })
            .collect();
        Self { ranges, positive }
    }

    /// Continuous variables whose range is zero; they contribute nothing.
    pub fn zero_range(&self) -> Vec<bool> {
        self.ranges.iter().map(|&r| !(r > 0.0)).collect()
    }
}

#[inline]
fn categorical_term(a: u32, b: u32, positive: Option<u32>) -> f64 {
    match positive {
        Some(p) => {
            if a == p && b == p {
                0.0
            } else {
                1.0
            }
        }
        None => f64::from(u8::from(a != b)),
    }
}

/// Gower terms of subjects `i` and `j`, continuous block first, then the
/// categorical block. Each term lies in [0, 1].
pub fn gower_terms(ds: &MixedDataset, i: usize, j: usize, cfg: &GowerConfig) -> Vec<f64> {
    let mut out = Vec::with_capacity(ds.p());
    for (c, &r) in ds.continuous().iter().zip(&cfg.ranges) {
        out.push(if r > 0.0 { (c[i] - c[j]).abs() / r } else { 0.0 });
    }
    for (c, &pos) in ds.categorical().iter().zip(&cfg.positive) {
        out.push(categorical_term(c[i], c[j], pos));
    }
    out
}

/// Gower distance (sum of per-variable terms, in [0, p]).
pub fn gower(ds: &MixedDataset, i: usize, j: usize, cfg: &GowerConfig) -> f64 {
    let mut d = 0.0;
    for (c, &r) in ds.continuous().iter().zip(&cfg.ranges) {
        if r > 0.0 {
            d += (c[i] - c[j]).abs() / r;
        }
    }
    for (c, &pos) in ds.categorical().iter().zip(&cfg.positive) {
        d += categorical_term(c[i], c[j], pos);
    }
    d
}

/// Level weights 1/p^3 for the FAMD categorical term.
#[derive(Debug, Clone, PartialEq)]
pub struct FamdConfig {
    inv_cubed: Vec<Vec<f64>>,
}

impl FamdConfig {
    /// Fails with `EmptyLevel` when a declared level is never observed.
    pub fn from_dataset(ds: &MixedDataset) -> Result<Self> {
        for (j, m) in ds.categorical_meta().enumerate() {
            if let Some(l) = ds.level_counts(j).iter().position(|&c| c == 0) {
                return Err(Error::EmptyLevel {
                    variable: m.name.clone(),
                    level: m.levels[l].clone(),
                });
            }
        }
        Ok(Self::dropping_empty_levels(ds))
    }

    /// Unobserved levels are dropped from the level set (weight 0; no
    /// subject ever carries them).
    pub fn dropping_empty_levels(ds: &MixedDataset) -> Self {
        let n = ds.n() as f64;
        let inv_cubed = (0..ds.categorical().len())
            .map(|j| {
                ds.level_counts(j)
                    .iter()
                    .map(|&c| {
                        if c == 0 {
                            0.0
                        } else {
                            let p = c as f64 / n;
                            1.0 / (p * p * p)
                        }
                    })
                    .collect()
            })
            .collect();
        Self { inv_cubed }
    }
}

/// FAMD distance with precomputed level proportions.
pub fn famd_dissim_with(ds: &MixedDataset, i: usize, j: usize, cfg: &FamdConfig) -> f64 {
    let mut d2 = 0.0;
    for c in ds.continuous() {
        let diff = c[i] - c[j];
        d2 += diff * diff;
    }
    for (c, w) in ds.categorical().iter().zip(&cfg.inv_cubed) {
        let (a, b) = (c[i], c[j]);
        if a != b {
            // indicator vectors differ in exactly the two levels a and b
            d2 += w[a as usize] + w[b as usize];
        }
    }
    libm::sqrt(d2)
}

/// FAMD distance between subjects `i` and `j`; proportions come from the
/// whole dataset.
pub fn famd_dissim(ds: &MixedDataset, i: usize, j: usize) -> Result<f64> {
    let cfg = FamdConfig::from_dataset(ds)?;
    Ok(famd_dissim_with(ds, i, j, &cfg))
}

/// The metric FAMD itself works in: z-scored continuous columns, and level
/// indicators centered and scaled as `y / p - 1` with column weight `p`. Two
/// subjects at levels a != b differ by `1/p_a + 1/p_b` in squared distance.
/// This differs from [`famd_dissim`], which applies the weight `1/p` on top
/// of the scaled indicators (`1/p^3` per level) and leaves continuous values
/// raw; PAM on this matrix is the FAMD comparator used in the benchmarks.
pub fn famd_factor_matrix(ds: &MixedDataset) -> DissimMatrix {
    let z = ds.with_standardized_continuous();
    let n = ds.n() as f64;
    let inv: Vec<Vec<f64>> = (0..z.categorical().len())
        .map(|j| {
            z.level_counts(j)
                .iter()
                .map(|&c| if c == 0 { 0.0 } else { n / c as f64 })
                .collect()
        })
        .collect();
    DissimMatrix::from_fn(z.n(), Measure::FamdFactor, |i, j| {
        let mut d2 = 0.0;
        for c in z.continuous() {
            let diff = c[i] - c[j];
            d2 += diff * diff;
        }
        for (c, w) in z.categorical().iter().zip(&inv) {
            if c[i] != c[j] {
                d2 += w[c[i] as usize] + w[c[j] as usize];
            }
        }
        libm::sqrt(d2)
    })
}

/// Squared Euclidean distance on the continuous block plus `gamma` times the
/// categorical mismatch count.
pub fn kprototypes_dissim(ds: &MixedDataset, i: usize, j: usize, gamma: f64) -> f64 {
    let mut d = 0.0;
    for c in ds.continuous() {
        let diff = c[i] - c[j];
        d += diff * diff;
    }
    let mismatches = ds.categorical().iter().filter(|c| c[i] != c[j]).count();
    d + gamma * mismatches as f64
}

/// Sum over unordered pairs of each variable's Gower term (continuous block
/// first, then categorical).
pub fn hydap_variable_totals(ds: &MixedDataset, cfg: &GowerConfig) -> Vec<f64> {
    let n = ds.n();
    let mut totals = Vec::with_capacity(ds.p());
    for (c, &r) in ds.continuous().iter().zip(&cfg.ranges) {
        if !(r > 0.0) {
            totals.push(0.0);
            continue;
        }
        let mut v = c.clone();
        v.sort_by(f64::total_cmp);
        // sum_{a<b} |x_a - x_b| = sum_k x_(k) (2k - n + 1) over sorted values
        let s: f64 = v
            .iter()
            .enumerate()
            .map(|(k, x)| x * (2.0 * k as f64 - n as f64 + 1.0))
            .sum();
        totals.push(s / r);
    }
    let all_pairs = crate::math::choose2(n as f64);
    for (j, &pos) in cfg.positive.iter().enumerate() {
        let counts = ds.level_counts(j);
        let agree = match pos {
            Some(p) => crate::math::choose2(counts[p as usize] as f64),
            None => counts.iter().map(|&c| crate::math::choose2(c as f64)).sum(),
        };
        totals.push(all_pairs - agree);
    }
    totals
}

/// HyDaP dissimilarity matrix: Gower terms divided by each variable's total
/// over unordered pairs. Variables with zero total are skipped.
pub fn hydap_dissim_matrix(ds: &MixedDataset) -> Result<DissimMatrix> {
    let n = ds.n();
    if n < 2 {
        return Err(Error::TooFewSubjects { n, required: 2 });
    }
    let cfg = GowerConfig::from_dataset(ds);
    let totals = hydap_variable_totals(ds, &cfg);
    let h = ds.h();
    // continuous: |a - b| * scale, scale = 1 / (range * total)
    let cont: Vec<(&[f64], f64)> = ds
        .continuous()
        .iter()
        .zip(&cfg.ranges)
        .zip(&totals[..h])
        .filter(|(_, &t)| t > 0.0)
        .map(|((c, &r), &t)| (c.as_slice(), 1.0 / (r * t)))
        .collect();
    let cat: Vec<(&[u32], Option<u32>, f64)> = ds
        .categorical()
        .iter()
        .zip(&cfg.positive)
        .zip(&totals[h..])
        .filter(|(_, &t)| t > 0.0)
        .map(|((c, &pos), &t)| (c.as_slice(), pos, 1.0 / t))
        .collect();
    if cont.is_empty() && cat.is_empty() {
        return Err(Error::InvalidParameter(
            "no variable has nonzero pairwise dissimilarity".into(),
        ));
    }
    Ok(DissimMatrix::from_fn(n, Measure::Hydap, |i, j| {
        let mut d = 0.0;
        for &(c, w) in &cont {
            d += (c[i] - c[j]).abs() * w;
        }
        for &(c, pos, w) in &cat {
            d += categorical_term(c[i], c[j], pos) * w;
        }
        d
    }))
}

/// Full matrix for a named measure. Euclidean and Manhattan use the raw
/// continuous block only.
pub fn pairwise_matrix(ds: &MixedDataset, measure: Measure) -> Result<DissimMatrix> {
    let n = ds.n();
    match measure {
        Measure::Hydap => hydap_dissim_matrix(ds),
        Measure::Gower => {
            let cfg = GowerConfig::from_dataset(ds);
            Ok(DissimMatrix::from_fn(n, measure, |i, j| gower(ds, i, j, &cfg)))
        }
        Measure::Famd => {
            let cfg = FamdConfig::dropping_empty_levels(ds);
            Ok(DissimMatrix::from_fn(n, measure, |i, j| {
                famd_dissim_with(ds, i, j, &cfg)
            }))
        }
        Measure::FamdFactor => Ok(famd_factor_matrix(ds)),
        Measure::Euclidean | Measure::Manhattan => {
            if ds.h() == 0 {
                return Err(Error::NoContinuous);
            }
            let m = ds.continuous_matrix();
            let order = if measure == Measure::Euclidean { 2.0 } else { 1.0 };
            Ok(DissimMatrix::from_fn(n, measure, |i, j| {
                minkowski(m.row(i), m.row(j), order).expect("equal rows, valid order")
            }))
        }
        Measure::ConsensusComplement | Measure::Custom => Err(Error::InvalidParameter(
            String::from("measure is not computed from a dataset"),
        )),
    }
}

/// Dense square form of a matrix.
pub fn to_square(dm: &DissimMatrix) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; dm.n()]; dm.n()];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = dm.get(i, j);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::VariableMeta;

    fn mixed3() -> MixedDataset {
        // 1 continuous + 1 binary, three subjects
        MixedDataset::new(
            vec![
                VariableMeta::continuous("x"),
                VariableMeta::categorical("b", &["no", "yes"]),
            ],
            vec![vec![0.0, 1.0, 4.0]],
            vec![vec![0, 1, 1]],
        )
        .unwrap()
    }

    #[test]
    fn minkowski_examples() {
        assert_eq!(minkowski(&[1.0, 2.0], &[1.0, 2.0], 2.0).unwrap(), 0.0);
        assert!((minkowski(&[0.0, 0.0], &[3.0, 4.0], 2.0).unwrap() - 5.0).abs() < 1e-15);
        assert!((minkowski(&[0.0, 0.0], &[3.0, 4.0], 1.0).unwrap() - 7.0).abs() < 1e-15);
        // m = 3: (27 + 64)^(1/3)
        let d3 = minkowski(&[0.0, 0.0], &[3.0, 4.0], 3.0).unwrap();
        assert!((d3 - libm::cbrt(91.0)).abs() < 1e-12);
        assert!(matches!(
            minkowski(&[0.0], &[1.0, 2.0], 2.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(minkowski(&[0.0], &[1.0], 0.5), Err(Error::InvalidOrder(0.5)));
    }

    #[test]
    fn simple_matching_examples() {
        assert_eq!(simple_matching(&[1, 2, 3], &[1, 2, 3]).unwrap(), 0.0);
        assert_eq!(simple_matching(&[1, 2, 3], &[2, 3, 1]).unwrap(), 3.0);
        assert_eq!(simple_matching(&[1, 2, 1], &[1, 1, 1]).unwrap(), 1.0);
        assert!(simple_matching(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn gower_examples() {
        let ds = MixedDataset::new(
            vec![
                VariableMeta::continuous("x"),
                VariableMeta::categorical("c", &["a", "b"]),
            ],
            vec![vec![0.0, 2.0, 7.0, 10.0]],
            vec![vec![0, 1, 1, 0]],
        )
        .unwrap();
        let cfg = GowerConfig::from_dataset(&ds);
        assert_eq!(gower(&ds, 1, 1, &cfg), 0.0);
        assert!((gower(&ds, 1, 2, &cfg) - 0.5).abs() < 1e-15);

        let asym = MixedDataset::new(
            vec![VariableMeta::asymmetric_binary("cancer", &["no", "yes"], "yes")],
            vec![],
            vec![vec![0, 0, 1, 1]],
        )
        .unwrap();
        let cfg = GowerConfig::from_dataset(&asym);
        assert_eq!(gower(&asym, 0, 1, &cfg), 1.0);
        assert_eq!(gower(&asym, 2, 3, &cfg), 0.0);
        assert_eq!(gower(&asym, 0, 2, &cfg), 1.0);
    }

    #[test]
    fn zero_range_contributes_nothing() {
        let ds = MixedDataset::new(
            vec![VariableMeta::continuous("x"), VariableMeta::continuous("k")],
            vec![vec![0.0, 1.0], vec![3.0, 3.0]],
            vec![],
        )
        .unwrap();
        let cfg = GowerConfig::from_dataset(&ds);
        assert_eq!(cfg.zero_range(), vec![false, true]);
        assert_eq!(gower(&ds, 0, 1, &cfg), 1.0);
    }

    #[test]
    fn famd_examples() {
        let bin = MixedDataset::new(
            vec![VariableMeta::categorical("b", &["a", "b"])],
            vec![],
            vec![vec![0, 1, 0, 1]],
        )
        .unwrap();
        assert_eq!(famd_dissim(&bin, 2, 2).unwrap(), 0.0);
        assert!((famd_dissim(&bin, 0, 1).unwrap() - 4.0).abs() < 1e-12);

        let cont = MixedDataset::new(
            vec![VariableMeta::continuous("x")],
            vec![vec![1.0, 4.0]],
            vec![],
        )
        .unwrap();
        assert!((famd_dissim(&cont, 0, 1).unwrap() - 3.0).abs() < 1e-15);

        let empty = MixedDataset::new(
            vec![VariableMeta::categorical("b", &["a", "b", "c"])],
            vec![],
            vec![vec![0, 1, 0, 1]],
        )
        .unwrap();
        assert!(matches!(
            famd_dissim(&empty, 0, 1),
            Err(Error::EmptyLevel { .. })
        ));
        let m = pairwise_matrix(&empty, Measure::Famd).unwrap();
        assert!((m.get(0, 1) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn famd_factor_weights() {
        // binary at (0.5, 0.5): 1/0.5 + 1/0.5 = 4 in squared distance
        let bin = MixedDataset::new(
            vec![VariableMeta::categorical("b", &["a", "b"])],
            vec![],
            vec![vec![0, 1, 0, 1]],
        )
        .unwrap();
        assert!((famd_factor_matrix(&bin).get(0, 1) - 2.0).abs() < 1e-12);

        // levels at (0.25, 0.75) plus a z-scored column (1, 2, 3, 4)
        let mixed = MixedDataset::new(
            vec![
                VariableMeta::continuous("x"),
                VariableMeta::categorical("b", &["a", "b"]),
            ],
            vec![vec![1.0, 2.0, 3.0, 4.0]],
            vec![vec![0, 1, 1, 1]],
        )
        .unwrap();
        let sd = crate::math::sample_sd(&[1.0, 2.0, 3.0, 4.0]);
        let m = pairwise_matrix(&mixed, Measure::FamdFactor).unwrap();
        let want = ((3.0 / sd) * (3.0 / sd) + 4.0 + 4.0 / 3.0).sqrt();
        assert!((m.get(0, 3) - want).abs() < 1e-12);
        assert!((m.get(1, 2) - 1.0 / sd).abs() < 1e-12);
    }

    #[test]
    fn kprototypes_examples() {
        let ds = MixedDataset::new(
            vec![
                VariableMeta::continuous("x1"),
                VariableMeta::continuous("x2"),
                VariableMeta::categorical("c1", &["a", "b"]),
                VariableMeta::categorical("c2", &["a", "b"]),
            ],
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            vec![vec![0, 1], vec![1, 0]],
        )
        .unwrap();
        assert!((kprototypes_dissim(&ds, 0, 1, 0.5) - 3.0).abs() < 1e-15);
        assert!((kprototypes_dissim(&ds, 0, 1, 0.0) - 2.0).abs() < 1e-15);
        assert_eq!(kprototypes_dissim(&ds, 1, 1, 0.5), 0.0);
    }

    #[test]
    fn hydap_toy_matches_hand_computation() {
        let ds = mixed3();
        // x: range 4, |diffs| over pairs: 1, 4, 3 -> terms .25, 1, .75, total 2
        // b: mismatches (0,1), (0,2) -> total 2
        let m = hydap_dissim_matrix(&ds).unwrap();
        let expect = [
            [0.0, 0.25 / 2.0 + 0.5, 1.0 / 2.0 + 0.5],
            [0.0, 0.0, 0.75 / 2.0],
        ];
        assert!((m.get(0, 1) - expect[0][1]).abs() < 1e-12);
        assert!((m.get(0, 2) - expect[0][2]).abs() < 1e-12);
        assert!((m.get(1, 2) - expect[1][2]).abs() < 1e-12);
        assert_eq!(
            hydap_dissim_matrix(&ds.select_rows(&[0])),
            Err(Error::TooFewSubjects { n: 1, required: 2 })
        );
    }

    #[test]
    fn binary_layout_roundtrip() {
        let m = hydap_dissim_matrix(&mixed3()).unwrap();
        let bytes = m.to_hdm1_bytes();
        assert_eq!(&bytes[..4], b"HDM1");
        assert_eq!(u64::from_le_bytes(bytes[4..12].try_into().unwrap()), 3);
        assert_eq!(bytes.len(), 12 + 3 * 8);
        let back = DissimMatrix::from_hdm1_bytes(&bytes, Measure::Hydap).unwrap();
        assert_eq!(back, m);
        assert!(DissimMatrix::from_hdm1_bytes(&bytes[..20], Measure::Hydap).is_err());
    }
}
