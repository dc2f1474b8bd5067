use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::kmeans::kmeans_warm;
use super::{ClusterResult, KMeansConfig};
use crate::dataset::RowMatrix;
use crate::error::{Error, Result};
use crate::metrics::variable_ss;
use crate::{math, par, rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SparseConfig {
    pub max_outer: usize,
    /// Relative change of the weighted BCSS objective that ends the
    /// alternation.
    pub tol: f64,
    pub kmeans: KMeansConfig,
    /// Pick the smallest bound within one standard error of the best gap
    /// instead of the best gap itself.
    pub one_se_rule: bool,
}

impl Default for SparseConfig {
    fn default() -> Self {
        Self {
            max_outer: 15,
            tol: 1e-4,
            kmeans: KMeansConfig::default(),
            one_se_rule: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityChoice {
    pub s: f64,
    pub candidates: Vec<f64>,
    pub gap_scores: Vec<f64>,
    /// Standard error of each gap value.
    pub gap_se: Vec<f64>,
}

fn soft_threshold(a: &[f64], delta: f64) -> Vec<f64> {
    a.iter().map(|&v| (v - delta).max(0.0)).collect()
}

fn l1(v: &[f64]) -> f64 {
    v.iter().sum()
}

fn l2(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// Weight update: soft-threshold the per-variable BCSS and L2-normalize,
/// with the threshold chosen by bisection so the L1 norm does not exceed `s`.
pub fn update_weights(bcss: &[f64], s: f64) -> Vec<f64> {
    let a: Vec<f64> = bcss.iter().map(|&v| v.max(0.0)).collect();
    let norm = l2(&a);
    if norm == 0.0 {
        return vec![0.0; a.len()];
    }
    let w0: Vec<f64> = a.iter().map(|v| v / norm).collect();
    if l1(&w0) <= s {
        return w0;
    }
    let ratio = |delta: f64| {
        let t = soft_threshold(&a, delta);
        let n2 = l2(&t);
        if n2 == 0.0 {
            0.0
        } else {
            l1(&t) / n2
        }
    };
    let (mut lo, mut hi) = (0.0, a.iter().copied().fold(0.0, f64::max));
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = soft_threshold(&a, hi);
    if l2(&t) == 0.0 {
        t = soft_threshold(&a, lo);
    }
    let n2 = l2(&t);
    t.iter().map(|v| v / n2).collect()
}

/// Sparse K-means with L1 bound `s`.
pub fn sparse_kmeans(data: &RowMatrix, k: usize, s: f64, seed: u64) -> Result<ClusterResult> {
    sparse_kmeans_with(data, k, s, seed, &SparseConfig::default())
}

pub fn sparse_kmeans_with(
    data: &RowMatrix,
    k: usize,
    s: f64,
    seed: u64,
    cfg: &SparseConfig,
) -> Result<ClusterResult> {
    let (n, h) = (data.rows(), data.cols());
    if k < 2 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    let max_s = libm::sqrt(h as f64);
    if !(s >= 1.0 && s <= max_s * (1.0 + 1e-12)) {
        return Err(Error::InvalidSparsity { s, max: max_s });
    }
    let mut w = vec![1.0 / max_s; h];
    let mut labels: Option<Vec<usize>> = None;
    let mut prev: Option<f64> = None;
    let mut objective = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut centers = super::Centers::None;
    while iterations < cfg.max_outer {
        let scale: Vec<f64> = w.iter().map(|&v| libm::sqrt(v)).collect();
        let scaled = data.scale_columns(&scale);
        let inner = kmeans_warm(
            &scaled,
            k,
            rng::derive_seed(seed, iterations as u64),
            &cfg.kmeans,
            labels.as_deref(),
        )?;
        iterations += 1;
        let (_, bcss) = variable_ss(data, &inner.assign, k);
        w = update_weights(&bcss, s);
        debug_assert!(check_weights(&w, s));
        objective = w.iter().zip(&bcss).map(|(a, b)| a * b).sum();
        labels = Some(inner.assign);
        centers = inner.centers;
        if let Some(p) = prev {
            if (objective - p).abs() <= cfg.tol * p.abs() {
                converged = true;
                break;
            }
        }
        prev = Some(objective);
    }
    Ok(ClusterResult {
        k,
        assign: labels.expect("at least one outer iteration"),
        objective,
        centers,
        weights: Some(w),
        iterations,
        converged,
    })
}

pub(crate) fn check_weights(w: &[f64], s: f64) -> bool {
    w.iter().all(|&v| v >= 0.0) && l2(w) <= 1.0 + 1e-9 && l1(w) <= s + 1e-9
}

/// Ten log-spaced candidates in `[1.1, √h]`; `[1]` when `√h < 1.1`.
pub fn default_sparsity_grid(h: usize) -> Vec<f64> {
    let hi = libm::sqrt(h as f64);
    if hi < 1.1 {
        return vec![hi.max(1.0)];
    }
    let (a, b) = (libm::log(1.1), libm::log(hi));
    (0..10)
        .map(|i| libm::exp(a + (b - a) * i as f64 / 9.0))
        .collect()
}

fn permute_columns(data: &RowMatrix, g: &mut rng::Rng) -> RowMatrix {
    let cols: Vec<Vec<f64>> = (0..data.cols())
        .map(|j| {
            let mut c = data.column(j);
            c.shuffle(g);
            c
        })
        .collect();
    RowMatrix::from_columns(&cols).expect("same shape")
}

/// Permutation gap statistic over `grid`. The candidate with the largest gap
/// wins (ties to the smaller bound); with `one_se_rule`, the smallest
/// candidate within one standard error of it.
pub fn choose_sparsity(
    data: &RowMatrix,
    k: usize,
    grid: &[f64],
    permutations: usize,
    seed: u64,
) -> Result<SparsityChoice> {
    choose_sparsity_with(data, k, grid, permutations, seed, &SparseConfig::default())
}

pub fn choose_sparsity_with(
    data: &RowMatrix,
    k: usize,
    grid: &[f64],
    permutations: usize,
    seed: u64,
    cfg: &SparseConfig,
) -> Result<SparsityChoice> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty sparsity grid".into()));
    }
    if permutations < 2 {
        return Err(Error::InvalidParameter(
            "at least two permutations required".into(),
        ));
    }
    if grid.len() == 1 {
        return Ok(SparsityChoice {
            s: grid[0],
            candidates: grid.to_vec(),
            gap_scores: vec![0.0],
            gap_se: vec![0.0],
        });
    }
    let datasets: Vec<RowMatrix> = core::iter::once(data.clone())
        .chain((0..permutations).map(|b| {
            let mut g = rng::stream(rng::derive_seed(seed, 0x9e37), b as u64);
            permute_columns(data, &mut g)
        }))
        .collect();
    let m = grid.len();
    let fit_seed = rng::derive_seed(seed, 1);
    let objectives: Vec<Result<f64>> = par::map_range(datasets.len() * m, |t| {
        let (d, g) = (t / m, t % m);
        sparse_kmeans_with(&datasets[d], k, grid[g], fit_seed, cfg).map(|r| r.objective)
    });
    let objectives: Vec<f64> = objectives.into_iter().collect::<Result<_>>()?;
    let ln = |v: f64| libm::log(v.max(f64::MIN_POSITIVE));
    let mut gaps = Vec::with_capacity(m);
    let mut ses = Vec::with_capacity(m);
    for g in 0..m {
        let null: Vec<f64> = (1..=permutations).map(|d| ln(objectives[d * m + g])).collect();
        gaps.push(ln(objectives[g]) - math::mean(&null));
        ses.push(math::sample_sd(&null) * libm::sqrt(1.0 + 1.0 / permutations as f64));
    }
    let mut best = 0;
    for g in 1..m {
        if gaps[g] > gaps[best] {
            best = g;
        }
    }
    let cut = if cfg.one_se_rule {
        gaps[best] - ses[best]
    } else {
        gaps[best] - 1e-12 * gaps[best].abs()
    };
    let chosen = (0..m)
        .filter(|&g| gaps[g] >= cut)
        .min_by(|&a, &b| grid[a].total_cmp(&grid[b]))
        .unwrap_or(best);
    Ok(SparsityChoice {
        s: grid[chosen],
        candidates: grid.to_vec(),
        gap_scores: gaps,
        gap_se: ses,
    })
}
