//! Finite mixture of conditionally independent Gaussian and multinomial
//! components, fitted by EM.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::MixedDataset;
use crate::error::{Error, Result};
use crate::partition::{kmeans_with, KMeansConfig};
use crate::{par, rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FmmConfig {
    pub restarts: usize,
    pub max_iter: usize,
    /// Absolute log-likelihood gain that ends EM.
    pub tol: f64,
    pub variance_floor: f64,
    /// Additive smoothing on multinomial cells.
    pub smoothing: f64,
}

impl Default for FmmConfig {
    fn default() -> Self {
        Self {
            restarts: 5,
            max_iter: 500,
            tol: 1e-6,
            variance_floor: 1e-6,
            smoothing: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmmModel {
    pub k: usize,
    pub pi: Vec<f64>,
    /// `means[c][j]`, `variances[c][j]` for continuous variable j.
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    /// `probs[c][j][l]` for categorical variable j, level l.
    pub probs: Vec<Vec<Vec<f64>>>,
    pub loglik: f64,
    pub bic: f64,
    pub iterations: usize,
    pub converged: bool,
    /// EM objective (log-likelihood plus the smoothing prior) per iteration;
    /// non-decreasing.
    pub trace: Vec<f64>,
}

impl FmmModel {
    pub fn parameter_count(&self) -> usize {
        let h = self.means.first().map_or(0, Vec::len);
        let cat: usize = self
            .probs
            .first()
            .map_or(0, |p| p.iter().map(|l| l.len() - 1).sum());
        (self.k - 1) + self.k * (2 * h + cat)
    }

    /// log π_c + log g_c(x_i) for every component.
    fn log_joint(&self, ds: &MixedDataset, i: usize, out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate() {
            let mut s = libm::log(self.pi[c]);
            for (j, col) in ds.continuous().iter().enumerate() {
                let (m, v) = (self.means[c][j], self.variances[c][j]);
                let d = col[i] - m;
                s -= 0.5 * (libm::log(2.0 * PI * v) + d * d / v);
            }
            for (j, col) in ds.categorical().iter().enumerate() {
                s += libm::log(self.probs[c][j][col[i] as usize]);
            }
            *o = s;
        }
    }
}

/// n x k responsibilities, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorMatrix {
    pub n: usize,
    pub k: usize,
    pub values: Vec<f64>,
}

impl PosteriorMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    /// Row argmax, ties to the lowest component.
    pub fn hard_assign(&self) -> Vec<usize> {
        (0..self.n)
            .map(|i| {
                let r = self.row(i);
                let mut best = 0;
                for c in 1..self.k {
                    if r[c] > r[best] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + libm::log(v.iter().map(|x| libm::exp(x - m)).sum::<f64>())
}

// E-step: fills responsibilities, returns the log-likelihood.
fn e_step(model: &FmmModel, ds: &MixedDataset, resp: &mut [f64]) -> f64 {
    let k = model.k;
    let mut ll = 0.0;
    let mut buf = vec![0.0; k];
    for i in 0..ds.n() {
        model.log_joint(ds, i, &mut buf);
        let z = log_sum_exp(&buf);
        ll += z;
        for c in 0..k {
            resp[i * k + c] = libm::exp(buf[c] - z);
        }
    }
    ll
}

fn m_step(ds: &MixedDataset, resp: &[f64], k: usize, cfg: &FmmConfig) -> Result<FmmModel> {
    let n = ds.n();
    let mut weight = vec![0.0; k];
    for i in 0..n {
        for c in 0..k {
            weight[c] += resp[i * k + c];
        }
    }
    if weight.iter().any(|&w| w < 1e-8 * n as f64) {
        return Err(Error::DegenerateComponent);
    }
    let pi = weight.iter().map(|w| w / n as f64).collect();
    let mut means = vec![vec![0.0; ds.h()]; k];
    let mut variances = vec![vec![0.0; ds.h()]; k];
    for (j, col) in ds.continuous().iter().enumerate() {
        for c in 0..k {
            let m = col.iter().enumerate().map(|(i, x)| resp[i * k + c] * x).sum::<f64>()
                / weight[c];
            let v = col
                .iter()
                .enumerate()
                .map(|(i, x)| resp[i * k + c] * (x - m) * (x - m))
                .sum::<f64>()
                / weight[c];
            means[c][j] = m;
            variances[c][j] = v.max(cfg.variance_floor);
        }
    }
    let levels: Vec<usize> = ds.categorical_meta().map(|m| m.levels.len()).collect();
    let mut probs: Vec<Vec<Vec<f64>>> = (0..k)
        .map(|_| levels.iter().map(|&l| vec![0.0; l]).collect())
        .collect();
    for (j, col) in ds.categorical().iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            for c in 0..k {
                probs[c][j][v as usize] += resp[i * k + c];
            }
        }
        for c in 0..k {
            let denom = weight[c] + cfg.smoothing * levels[j] as f64;
            for p in probs[c][j].iter_mut() {
                *p = (*p + cfg.smoothing) / denom;
            }
        }
    }
    Ok(FmmModel {
        k,
        pi,
        means,
        variances,
        probs,
        loglik: f64::NAN,
        bic: f64::NAN,
        iterations: 0,
        converged: false,
        trace: Vec::new(),
    })
}

// Log of the Dirichlet smoothing prior, the term EM actually ascends
// alongside the likelihood.
fn log_prior(model: &FmmModel, cfg: &FmmConfig) -> f64 {
    if cfg.smoothing == 0.0 {
        return 0.0;
    }
    cfg.smoothing
        * model
            .probs
            .iter()
            .flatten()
            .flatten()
            .map(|&p| libm::log(p))
            .sum::<f64>()
}

fn em(ds: &MixedDataset, init: Vec<usize>, k: usize, cfg: &FmmConfig) -> Result<FmmModel> {
    let n = ds.n();
    let mut resp = vec![0.0; n * k];
    for (i, &c) in init.iter().enumerate() {
        resp[i * k + c] = 1.0;
    }
    let mut trace = Vec::new();
    let mut model;
    let mut ll;
    let mut iterations = 0;
    let mut converged = false;
    loop {
        iterations += 1;
        model = m_step(ds, &resp, k, cfg)?;
        ll = e_step(&model, ds, &mut resp);
        let obj = ll + log_prior(&model, cfg);
        if let Some(&prev) = trace.last() {
            debug_assert!(
                obj >= prev - 1e-8 * f64::max(1.0, libm::fabs(prev)),
                "EM objective decreased: {prev} -> {obj}"
            );
            trace.push(obj);
            if obj - prev < cfg.tol {
                converged = true;
                break;
            }
        } else {
            trace.push(obj);
        }
        if iterations >= cfg.max_iter {
            break;
        }
    }
    model.loglik = ll;
    model.iterations = iterations;
    model.converged = converged;
    model.trace = trace;
    model.bic = -2.0 * ll + model.parameter_count() as f64 * libm::log(n as f64);
    Ok(model)
}

fn initial_labels(ds: &MixedDataset, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k == 1 {
        return Ok(vec![0; ds.n()]);
    }
    if ds.h() == 0 {
        let mut g = rng::seeded(seed);
        let mut labels: Vec<usize> = (0..ds.n()).map(|_| g.random_range(0..k)).collect();
        for (c, l) in labels.iter_mut().take(k).enumerate() {
            *l = c;
        }
        return Ok(labels);
    }
    let z = ds.with_standardized_continuous().continuous_matrix();
    let cfg = KMeansConfig {
        restarts: 1,
        ..KMeansConfig::default()
    };
    Ok(kmeans_with(&z, k, seed, &cfg)?.assign)
}

/// EM fit from K-means-initialized responsibilities; best of `restarts` by
/// log-likelihood.
pub fn fmm_fit(ds: &MixedDataset, k: usize, seed: u64, restarts: usize) -> Result<FmmModel> {
    fmm_fit_with(
        ds,
        k,
        seed,
        &FmmConfig {
            restarts,
            ..FmmConfig::default()
        },
    )
}

pub fn fmm_fit_with(ds: &MixedDataset, k: usize, seed: u64, cfg: &FmmConfig) -> Result<FmmModel> {
    let n = ds.n();
    if k == 0 || n <= k {
        return Err(Error::InvalidK { k, n });
    }
    let runs = if k == 1 { 1 } else { cfg.restarts.max(1) };
    let fits: Vec<Result<FmmModel>> = par::map_range(runs, |r| {
        let init = initial_labels(ds, k, rng::derive_seed(seed, r as u64))?;
        em(ds, init, k, cfg)
    });
    let mut best: Option<FmmModel> = None;
    for f in fits.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| f.loglik > b.loglik) {
            best = Some(f);
        }
    }
    best.ok_or(Error::DegenerateComponent)
}

pub fn fmm_posterior(model: &FmmModel, ds: &MixedDataset) -> Result<PosteriorMatrix> {
    let h = model.means.first().map_or(0, Vec::len);
    let q = model.probs.first().map_or(0, Vec::len);
    if h != ds.h() {
        return Err(Error::DimensionMismatch { left: h, right: ds.h() });
    }
    if q != ds.categorical().len() {
        return Err(Error::DimensionMismatch {
            left: q,
            right: ds.categorical().len(),
        });
    }
    let mut values = vec![0.0; ds.n() * model.k];
    e_step(model, ds, &mut values);
    Ok(PosteriorMatrix {
        n: ds.n(),
        k: model.k,
        values,
    })
}

/// Fits k = 1..=k_max and returns the minimum-BIC model (ties to smaller k).
pub fn fmm_select_k(ds: &MixedDataset, k_max: usize, seed: u64) -> Result<FmmModel> {
    if k_max == 0 {
        return Err(Error::InvalidK { k: 0, n: ds.n() });
    }
    let mut best: Option<FmmModel> = None;
    for k in 1..=k_max {
        let m = fmm_fit(ds, k, rng::derive_seed(seed, k as u64), FmmConfig::default().restarts)?;
        if best.as_ref().is_none_or(|b| m.bic < b.bic) {
            best = Some(m);
        }
    }
    Ok(best.expect("k_max >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::VariableMeta;
    use crate::math::{mean, population_variance};
    use crate::metrics::ari;
    use rand_distr::{Distribution, StandardNormal};

    fn mixed(n_per: usize, sep: f64, seed: u64) -> (MixedDataset, Vec<usize>) {
        let mut g = rng::seeded(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut c = Vec::new();
        let mut truth = Vec::new();
        for k in 0..3 {
            for _ in 0..n_per {
                let z: f64 = StandardNormal.sample(&mut g);
                let w: f64 = StandardNormal.sample(&mut g);
                x.push(k as f64 * sep + z);
                y.push(w);
                c.push(if g.random::<f64>() < 0.7 { k as u32 } else { g.random_range(0..3) });
                truth.push(k);
            }
        }
        let ds = MixedDataset::new(
            vec![
                VariableMeta::continuous("x"),
                VariableMeta::continuous("y"),
                VariableMeta::categorical("c", &["a", "b", "c"]),
            ],
            vec![x, y],
            vec![c],
        )
        .unwrap();
        (ds, truth)
    }

    #[test]
    fn single_component_is_closed_form() {
        let (ds, _) = mixed(20, 3.0, 1);
        let m = fmm_fit(&ds, 1, 0, 1).unwrap();
        for j in 0..2 {
            assert!((m.means[0][j] - mean(&ds.continuous()[j])).abs() < 1e-12);
            assert!((m.variances[0][j] - population_variance(&ds.continuous()[j])).abs() < 1e-12);
        }
        let counts = ds.level_counts(0);
        for (l, &cnt) in counts.iter().enumerate() {
            assert!((m.probs[0][0][l] - cnt as f64 / 60.0).abs() < 1e-7);
        }
        let post = fmm_posterior(&m, &ds).unwrap();
        assert!(post.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn em_is_monotone() {
        for seed in 0..10 {
            let (ds, _) = mixed(15, 1.0, seed);
            let m = fmm_fit(&ds, 3, seed, 2).unwrap();
            for w in m.trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-8 * w[0].abs().max(1.0));
            }
        }
    }

    #[test]
    fn recovers_separated_components_and_bic_picks_three() {
        let (ds, truth) = mixed(40, 10.0, 3);
        let m = fmm_select_k(&ds, 5, 1).unwrap();
        assert_eq!(m.k, 3);
        let post = fmm_posterior(&m, &ds).unwrap();
        assert!(ari(&post.hard_assign(), &truth).unwrap() > 0.95);
        for i in 0..ds.n() {
            assert!((post.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn noise_selects_one_component() {
        let mut ones = 0;
        for seed in 0..10 {
            let mut g = rng::seeded(seed);
            let x: Vec<f64> = (0..200).map(|_| StandardNormal.sample(&mut g)).collect();
            let ds =
                MixedDataset::new(vec![VariableMeta::continuous("x")], vec![x], vec![]).unwrap();
            if fmm_select_k(&ds, 4, seed).unwrap().k == 1 {
                ones += 1;
            }
            if seed == 0 {
                assert_eq!(fmm_select_k(&ds, 1, 2).unwrap().k, 1);
            }
        }
        assert!(ones >= 8, "{ones}/10");
    }

    #[test]
    fn posterior_matches_bayes_rule() {
        let ds = MixedDataset::new(vec![VariableMeta::continuous("x")], vec![vec![0.0]], vec![])
            .unwrap();
        let model = FmmModel {
            k: 2,
            pi: vec![0.3, 0.7],
            means: vec![vec![-1.0], vec![2.0]],
            variances: vec![vec![1.0], vec![4.0]],
            probs: vec![vec![], vec![]],
            loglik: 0.0,
            bic: 0.0,
            iterations: 0,
            converged: true,
            trace: vec![],
        };
        let dens = |m: f64, v: f64| libm::exp(-0.5 * m * m / v) / libm::sqrt(2.0 * PI * v);
        let a = 0.3 * dens(-1.0, 1.0);
        let b = 0.7 * dens(2.0, 4.0);
        let post = fmm_posterior(&model, &ds).unwrap();
        assert!((post.row(0)[0] - a / (a + b)).abs() < 1e-12);

        let sym = FmmModel {
            pi: vec![0.5, 0.5],
            means: vec![vec![-1.0], vec![1.0]],
            variances: vec![vec![1.0], vec![1.0]],
            ..model
        };
        let post = fmm_posterior(&sym, &ds).unwrap();
        assert!((post.row(0)[0] - 0.5).abs() < 1e-12);
        assert_eq!(post.hard_assign(), vec![0]);
    }

    #[test]
    fn parameter_count() {
        let (ds, _) = mixed(10, 5.0, 0);
        let m = fmm_fit(&ds, 2, 0, 1).unwrap();
        // (k-1) + k(2h + (3-1)) = 1 + 2*(4+2)
        assert_eq!(m.parameter_count(), 13);
    }
}
