//! Mixed-type data model and continuous-variable standardization.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RowMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                left: data.len(),
                right: rows * cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from equal-length columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut data = vec![0.0; rows * cols];
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch {
                    left: c.len(),
                    right: rows,
                });
            }
            for (i, &v) in c.iter().enumerate() {
                data[i * cols + j] = v;
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    left: r.len(),
                    right: cols,
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for i in 0..self.rows {
            let r = self.row(i);
            data.extend(idx.iter().map(|&j| r[j]));
        }
        Self {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    /// Multiplies column `j` by `factors[j]`.
    pub fn scale_columns(&self, factors: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows {
            for (v, f) in out.row_mut(i).iter_mut().zip(factors) {
                *v *= f;
            }
        }
        out
    }
}

/// Squared Euclidean distance between two equal-length slices.
#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Continuous,
    Categorical,
    /// Binary variable where only joint presence of `positive_level` counts
    /// as agreement.
    AsymmetricBinary,
}

impl VarKind {
    pub fn is_categorical(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableMeta {
    pub name: String,
    pub kind: VarKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_level: Option<String>,
}

impl VariableMeta {
    pub fn continuous(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: VarKind::Continuous,
            levels: Vec::new(),
            positive_level: None,
        }
    }

    pub fn categorical<S: ToString>(name: impl Into<String>, levels: &[S]) -> Self {
        Self {
            name: name.into(),
            kind: VarKind::Categorical,
            levels: levels.iter().map(ToString::to_string).collect(),
            positive_level: None,
        }
    }

    pub fn asymmetric_binary<S: ToString>(
        name: impl Into<String>,
        levels: &[S],
        positive: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            kind: VarKind::AsymmetricBinary,
            levels: levels.iter().map(ToString::to_string).collect(),
            positive_level: Some(positive.into()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            VarKind::Continuous if !self.levels.is_empty() => Err(Error::Schema(format!(
                "continuous variable `{}` must not list levels",
                self.name
            ))),
            VarKind::Continuous => Ok(()),
            _ if self.levels.len() < 2 => Err(Error::Schema(format!(
                "categorical variable `{}` needs at least two levels",
                self.name
            ))),
            VarKind::AsymmetricBinary => match &self.positive_level {
                Some(p) if self.levels.contains(p) => Ok(()),
                _ => Err(Error::Schema(format!(
                    "asymmetric binary `{}` needs a positive_level among its levels",
                    self.name
                ))),
            },
            VarKind::Categorical => {
                let uniq: BTreeSet<&String> = self.levels.iter().collect();
                if uniq.len() != self.levels.len() {
                    return Err(Error::Schema(format!(
                        "variable `{}` repeats a level",
                        self.name
                    )));
                }
                Ok(())
            }
        }
    }

    /// Index of the positive level for asymmetric binaries.
    pub fn positive_index(&self) -> Option<u32> {
        let p = self.positive_level.as_ref()?;
        self.levels.iter().position(|l| l == p).map(|i| i as u32)
    }

    pub fn level_index(&self, token: &str) -> Option<u32> {
        self.levels.iter().position(|l| l == token).map(|i| i as u32)
    }
}

/// An n x p table split into a continuous block (h columns) and a
/// categorical block (p - h columns of level indices). `meta` keeps the
/// schema order; the blocks keep the relative order of their variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedDataset {
    n: usize,
    meta: Vec<VariableMeta>,
    continuous: Vec<Vec<f64>>,
    categorical: Vec<Vec<u32>>,
}

impl MixedDataset {
    pub fn new(
        meta: Vec<VariableMeta>,
        continuous: Vec<Vec<f64>>,
        categorical: Vec<Vec<u32>>,
    ) -> Result<Self> {
        if meta.is_empty() {
            return Err(Error::Schema("schema lists no variables".into()));
        }
        let mut names = BTreeSet::new();
        for m in &meta {
            m.validate()?;
            if !names.insert(m.name.as_str()) {
                return Err(Error::Schema(format!("duplicate variable `{}`", m.name)));
            }
        }
        let h = meta.iter().filter(|m| !m.kind.is_categorical()).count();
        if h != continuous.len() || meta.len() - h != categorical.len() {
            return Err(Error::Schema(format!(
                "schema has {} continuous and {} categorical variables but data has {} and {}",
                h,
                meta.len() - h,
                continuous.len(),
                categorical.len()
            )));
        }
        let n = continuous
            .first()
            .map(Vec::len)
            .or_else(|| categorical.first().map(Vec::len))
            .unwrap_or(0);
        for c in &continuous {
            if c.len() != n {
                return Err(Error::DimensionMismatch { left: c.len(), right: n });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Schema("continuous cells must be finite".into()));
            }
        }
        let cat_meta: Vec<&VariableMeta> =
            meta.iter().filter(|m| m.kind.is_categorical()).collect();
        for (c, m) in categorical.iter().zip(&cat_meta) {
            if c.len() != n {
                return Err(Error::DimensionMismatch { left: c.len(), right: n });
            }
            if let Some(bad) = c.iter().find(|&&v| v as usize >= m.levels.len()) {
                return Err(Error::Schema(format!(
                    "level index {} out of range for `{}`",
                    bad, m.name
                )));
            }
        }
        Ok(Self {
            n,
            meta,
            continuous,
            categorical,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.meta.len()
    }

    /// Number of continuous variables.
    #[inline]
    pub fn h(&self) -> usize {
        self.continuous.len()
    }

    pub fn meta(&self) -> &[VariableMeta] {
        &self.meta
    }

    pub fn continuous(&self) -> &[Vec<f64>] {
        &self.continuous
    }

    pub fn categorical(&self) -> &[Vec<u32>] {
        &self.categorical
    }

    pub fn continuous_meta(&self) -> impl Iterator<Item = &VariableMeta> {
        self.meta.iter().filter(|m| !m.kind.is_categorical())
    }

    pub fn categorical_meta(&self) -> impl Iterator<Item = &VariableMeta> {
        self.meta.iter().filter(|m| m.kind.is_categorical())
    }

    pub fn continuous_names(&self) -> Vec<String> {
        self.continuous_meta().map(|m| m.name.clone()).collect()
    }

    pub fn categorical_names(&self) -> Vec<String> {
        self.categorical_meta().map(|m| m.name.clone()).collect()
    }

    /// Continuous block as an n x h row-major matrix (raw units).
    pub fn continuous_matrix(&self) -> RowMatrix {
        if self.continuous.is_empty() {
            return RowMatrix::zeros(self.n, 0);
        }
        RowMatrix::from_columns(&self.continuous).expect("columns validated at construction")
    }

    /// Restricts the dataset to the named variables, keeping schema order.
    pub fn select<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptySelection);
        }
        let wanted: BTreeSet<&str> = keep.iter().map(AsRef::as_ref).collect();
        for w in &wanted {
            if !self.meta.iter().any(|m| m.name == *w) {
                return Err(Error::UnknownVariable((*w).to_string()));
            }
        }
        let mut meta = Vec::new();
        let mut continuous = Vec::new();
        let mut categorical = Vec::new();
        let (mut ci, mut ki) = (0, 0);
        for m in &self.meta {
            let keep_it = wanted.contains(m.name.as_str());
            if m.kind.is_categorical() {
                if keep_it {
                    categorical.push(self.categorical[ki].clone());
                }
                ki += 1;
            } else {
                if keep_it {
                    continuous.push(self.continuous[ci].clone());
                }
                ci += 1;
            }
            if keep_it {
                meta.push(m.clone());
            }
        }
        let mut out = Self::new(meta, continuous, categorical)?;
        out.n = self.n;
        Ok(out)
    }

    /// New dataset made of the given rows (repeats allowed).
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            n: idx.len(),
            meta: self.meta.clone(),
            continuous: self
                .continuous
                .iter()
                .map(|c| idx.iter().map(|&i| c[i]).collect())
                .collect(),
            categorical: self
                .categorical
                .iter()
                .map(|c| idx.iter().map(|&i| c[i]).collect())
                .collect(),
        }
    }

    /// Copy whose continuous columns are z-scored (see [`standardize`]).
    pub fn with_standardized_continuous(&self) -> Self {
        let mut out = self.clone();
        for col in &mut out.continuous {
            let (z, _, _, _) = zscore(col);
            *col = z;
        }
        out
    }

    /// Copy with continuous column `j` replaced by `f` applied elementwise.
    pub fn map_continuous(&self, j: usize, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.continuous[j] {
            *v = f(*v);
        }
        out
    }

    /// Observed count of each level of categorical column `j`.
    pub fn level_counts(&self, j: usize) -> Vec<usize> {
        let levels = self.categorical_meta().nth(j).map_or(0, |m| m.levels.len());
        let mut counts = vec![0; levels];
        for &v in &self.categorical[j] {
            counts[v as usize] += 1;
        }
        counts
    }
}

/// Continuous block with every column centered and scaled to unit sample
/// standard deviation. Constant columns are centered and keep scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedView {
    pub matrix: RowMatrix,
    pub names: Vec<String>,
    pub centers: Vec<f64>,
    pub scales: Vec<f64>,
    pub constant: Vec<bool>,
}

impl StandardizedView {
    /// Standardizes the columns of a raw matrix.
    pub fn from_matrix(raw: &RowMatrix, names: Vec<String>) -> Self {
        let cols: Vec<Vec<f64>> = (0..raw.cols()).map(|j| raw.column(j)).collect();
        Self::from_columns(&cols, names, raw.rows())
    }

    fn from_columns(cols: &[Vec<f64>], names: Vec<String>, n: usize) -> Self {
        let mut out_cols = Vec::with_capacity(cols.len());
        let mut centers = Vec::with_capacity(cols.len());
        let mut scales = Vec::with_capacity(cols.len());
        let mut constant = Vec::with_capacity(cols.len());
        for c in cols {
            let (z, m, s, is_const) = zscore(c);
            out_cols.push(z);
            centers.push(m);
            scales.push(s);
            constant.push(is_const);
        }
        let matrix = if out_cols.is_empty() {
            RowMatrix::zeros(n, 0)
        } else {
            RowMatrix::from_columns(&out_cols).expect("equal-length columns")
        };
        Self {
            matrix,
            names,
            centers,
            scales,
            constant,
        }
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn h(&self) -> usize {
        self.matrix.cols()
    }
}

fn zscore(col: &[f64]) -> (Vec<f64>, f64, f64, bool) {
    let m = math::mean(col);
    let sd = math::sample_sd(col);
    // columns whose spread is pure rounding noise count as constant
    let is_const = !(sd > 1e-12 * (1.0 + libm::fabs(m)));
    let s = if is_const { 1.0 } else { sd };
    let z = col.iter().map(|v| (v - m) / s).collect();
    (z, m, s, is_const)
}

/// Z-scores each continuous column with the sample (n - 1) standard
/// deviation.
pub fn standardize(ds: &MixedDataset) -> Result<StandardizedView> {
    if ds.h() == 0 {
        return Err(Error::NoContinuous);
    }
    Ok(StandardizedView::from_columns(
        ds.continuous(),
        ds.continuous_names(),
        ds.n(),
    ))
}
