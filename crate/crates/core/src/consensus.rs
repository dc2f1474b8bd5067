//! Resampling consensus clustering with a K-means inner loop.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::RowMatrix;
use crate::dissimilarity::{DissimMatrix, Measure};
use crate::error::{Error, Result};
use crate::partition::{kmeans_with, relabel_by_first_appearance, Centers, ClusterResult, KMeansConfig};
use crate::{par, rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConsensusConfig {
    pub h_iters: usize,
    pub frac: f64,
    pub k_max: usize,
    pub stability_threshold: f64,
    /// K-means restarts inside each subsample.
    pub inner_restarts: usize,
    /// Use this seed for every inner K-means run instead of a per-run one.
    pub inner_seed: Option<u64>,
    /// Keep every K's consensus matrix in the report (n² memory per K).
    pub keep_matrices: bool,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        Self {
            h_iters: 100,
            frac: 0.8,
            k_max: 6,
            stability_threshold: 0.8,
            inner_restarts: 1,
            inner_seed: None,
            keep_matrices: false,
        }
    }
}

/// Pairwise co-clustering counts over subsampling runs (condensed upper
/// triangle).
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusMatrix {
    n: usize,
    together: Vec<u16>,
    same: Vec<u16>,
}

impl ConsensusMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        a * (2 * self.n - a - 1) / 2 + (b - a - 1)
    }

    /// Consensus index; 1 on the diagonal, 0 for never co-sampled pairs.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 1.0;
        }
        let t = self.idx(i, j);
        if self.together[t] == 0 {
            0.0
        } else {
            f64::from(self.same[t]) / f64::from(self.together[t])
        }
    }

    pub fn together(&self, i: usize, j: usize) -> u16 {
        if i == j {
            0
        } else {
            self.together[self.idx(i, j)]
        }
    }

    pub fn unsampled_pairs(&self) -> usize {
        self.together.iter().filter(|&&t| t == 0).count()
    }

    pub fn pair_count(&self) -> usize {
        self.together.len()
    }

    /// `1 - consensus` as a dissimilarity matrix.
    pub fn to_dissim(&self) -> DissimMatrix {
        DissimMatrix::from_condensed(self.n, self.complement(), Measure::ConsensusComplement)
            .expect("values in [0, 1]")
    }

    fn complement(&self) -> Vec<f64> {
        (0..self.together.len())
            .map(|t| {
                if self.together[t] == 0 {
                    1.0
                } else {
                    1.0 - f64::from(self.same[t]) / f64::from(self.together[t])
                }
            })
            .collect()
    }
}

fn validate(n: usize, k: usize, cfg: &ConsensusConfig) -> Result<()> {
    if k < 2 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    if !(cfg.frac > 0.0 && cfg.frac <= 1.0) {
        return Err(Error::InvalidFraction(cfg.frac));
    }
    if cfg.h_iters < 2 || cfg.h_iters > usize::from(u16::MAX) {
        return Err(Error::InvalidParameter(format!(
            "h_iters must be in 2..=65535, got {}",
            cfg.h_iters
        )));
    }
    let m = libm::ceil(cfg.frac * n as f64) as usize;
    if m < k {
        return Err(Error::TooFewSubjects { n: m, required: k });
    }
    Ok(())
}

/// Consensus matrix from `h_iters` subsamples of ⌈frac·n⌉ subjects, and the
/// average-linkage partition of `1 - consensus` cut at `k`.
pub fn consensus_run(
    data: &RowMatrix,
    k: usize,
    cfg: &ConsensusConfig,
    seed: u64,
) -> Result<(ConsensusMatrix, ClusterResult)> {
    let n = data.rows();
    validate(n, k, cfg)?;
    let m = libm::ceil(cfg.frac * n as f64) as usize;
    let kcfg = KMeansConfig {
        restarts: cfg.inner_restarts.max(1),
        ..KMeansConfig::default()
    };
    let runs: Vec<Result<(Vec<usize>, Vec<usize>)>> = par::map_range(cfg.h_iters, |it| {
        let mut g = rng::stream(seed, it as u64);
        let mut idx = if m == n {
            (0..n).collect()
        } else {
            rand::seq::index::sample(&mut g, n, m).into_vec()
        };
        idx.sort_unstable();
        let inner_seed = cfg
            .inner_seed
            .unwrap_or_else(|| rng::derive_seed(seed, it as u64));
        let fit = kmeans_with(&data.select_rows(&idx), k, inner_seed, &kcfg)?;
        Ok((idx, fit.assign))
    });
    let pairs = n * (n - 1) / 2;
    let mut cm = ConsensusMatrix {
        n,
        together: vec![0; pairs],
        same: vec![0; pairs],
    };
    for run in runs {
        let (idx, labels) = run?;
        for a in 0..idx.len() {
            let base = idx[a] * (2 * n - idx[a] - 1) / 2;
            for b in a + 1..idx.len() {
                let t = base + (idx[b] - idx[a] - 1);
                cm.together[t] += 1;
                if labels[a] == labels[b] {
                    cm.same[t] += 1;
                }
            }
        }
    }
    // cut the complement directly: at large n a second condensed copy is
    // the difference between fitting in memory and not
    let assign = cut_merges(n, &linkage_in_place(n, cm.complement()), k);
    Ok((
        cm,
        ClusterResult {
            k,
            assign,
            objective: 0.0,
            centers: Centers::None,
            weights: None,
            iterations: cfg.h_iters,
            converged: true,
        },
    ))
}

/// Average-linkage agglomeration (nearest-neighbour chain), returning the
/// merge list `(a, b, height)` in order of height. Indices refer to original
/// subjects representing each cluster.
pub fn average_linkage(dm: &DissimMatrix) -> Vec<(usize, usize, f64)> {
    linkage_in_place(dm.n(), dm.condensed().to_vec())
}

fn linkage_in_place(n: usize, mut d: Vec<f64>) -> Vec<(usize, usize, f64)> {
    let idx = |i: usize, j: usize| {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        a * (2 * n - a - 1) / 2 + (b - a - 1)
    };
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut chain: Vec<usize> = Vec::new();
    while merges.len() + 1 < n {
        if chain.is_empty() {
            chain.push(active.iter().position(|&a| a).expect("active cluster"));
        }
        let a = *chain.last().expect("non-empty chain");
        let prev = if chain.len() >= 2 {
            Some(chain[chain.len() - 2])
        } else {
            None
        };
        // nearest active neighbour, preferring the chain predecessor on ties
        let mut best = prev.unwrap_or(usize::MAX);
        let mut best_d = prev.map_or(f64::INFINITY, |p| d[idx(a, p)]);
        for c in 0..n {
            if c != a && active[c] {
                let dc = d[idx(a, c)];
                if dc < best_d {
                    best_d = dc;
                    best = c;
                }
            }
        }
        if Some(best) == prev {
            chain.pop();
            chain.pop();
            let (x, y) = if a < best { (a, best) } else { (best, a) };
            merges.push((x, y, best_d));
            // merged cluster lives at x
            let (sx, sy) = (size[x] as f64, size[y] as f64);
            for c in 0..n {
                if active[c] && c != x && c != y {
                    let v = (sx * d[idx(x, c)] + sy * d[idx(y, c)]) / (sx + sy);
                    d[idx(x, c)] = v;
                }
            }
            active[y] = false;
            size[x] += size[y];
        } else {
            chain.push(best);
        }
    }
    merges.sort_by(|p, q| p.2.total_cmp(&q.2));
    merges
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Labels from cutting the average-linkage tree into `k` clusters, numbered
/// by first appearance.
pub fn average_linkage_cut(dm: &DissimMatrix, k: usize) -> Vec<usize> {
    cut_merges(dm.n(), &average_linkage(dm), k)
}

fn cut_merges(n: usize, merges: &[(usize, usize, f64)], k: usize) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    for &(a, b, _) in merges.iter().take(n.saturating_sub(k)) {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    relabel_by_first_appearance(&roots)
}

/// Mean consensus over within-cluster pairs for each cluster (1 for
/// singletons).
pub fn cluster_consensus(cm: &ConsensusMatrix, assign: &[usize]) -> Result<Vec<f64>> {
    if assign.len() != cm.n {
        return Err(Error::LengthMismatch(assign.len(), cm.n));
    }
    let k = assign.iter().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &a) in assign.iter().enumerate() {
        members[a].push(i);
    }
    Ok(members
        .iter()
        .map(|mem| {
            if mem.len() < 2 {
                return 1.0;
            }
            let mut s = 0.0;
            for a in 0..mem.len() {
                for b in a + 1..mem.len() {
                    s += cm.get(mem[a], mem[b]);
                }
            }
            s / (mem.len() * (mem.len() - 1) / 2) as f64
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusSummary {
    pub k: usize,
    pub cluster_consensus: Vec<f64>,
    pub mean_consensus: f64,
    pub min_consensus: f64,
    pub cluster_sizes: Vec<usize>,
    pub unsampled_pairs: usize,
    pub assign: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusReport {
    pub per_k: Vec<ConsensusSummary>,
    pub chosen_k: usize,
    pub homogeneous: bool,
    pub stability_threshold: f64,
    pub warnings: Vec<String>,
    /// Empty unless `keep_matrices` was set.
    #[serde(skip)]
    pub matrices: Vec<ConsensusMatrix>,
}

impl ConsensusReport {
    pub fn chosen(&self) -> Option<&ConsensusSummary> {
        self.per_k.iter().find(|s| s.k == self.chosen_k)
    }

    pub fn matrix_for(&self, k: usize) -> Option<&ConsensusMatrix> {
        self.per_k
            .iter()
            .position(|s| s.k == k)
            .and_then(|p| self.matrices.get(p))
    }
}

/// Runs K = 2..=k_max and picks the K with the largest mean cluster-consensus
/// among those whose every cluster reaches the stability threshold; K = 1
/// (homogeneous) when none does.
pub fn select_k(data: &RowMatrix, cfg: &ConsensusConfig, seed: u64) -> Result<ConsensusReport> {
    if cfg.k_max < 2 {
        return Err(Error::InvalidParameter(format!(
            "k_max must be at least 2, got {}",
            cfg.k_max
        )));
    }
    let n = data.rows();
    let mut per_k = Vec::new();
    let mut matrices = Vec::new();
    let mut warnings = Vec::new();
    for k in 2..=cfg.k_max.min(n) {
        let (cm, fit) = consensus_run(data, k, cfg, rng::derive_seed(seed, k as u64))?;
        let cc = cluster_consensus(&cm, &fit.assign)?;
        let unsampled = cm.unsampled_pairs();
        if unsampled as f64 > 0.01 * cm.pair_count() as f64 {
            warnings.push(format!(
                "K={k}: {unsampled} of {} pairs never sampled together; raise h_iters",
                cm.pair_count()
            ));
        }
        per_k.push(ConsensusSummary {
            k,
            mean_consensus: cc.iter().sum::<f64>() / cc.len() as f64,
            min_consensus: cc.iter().copied().fold(f64::INFINITY, f64::min),
            cluster_sizes: fit.cluster_sizes(),
            cluster_consensus: cc,
            unsampled_pairs: unsampled,
            assign: fit.assign,
        });
        if cfg.keep_matrices {
            matrices.push(cm);
        }
    }
    let mut chosen = None::<&ConsensusSummary>;
    for s in &per_k {
        if s.min_consensus >= cfg.stability_threshold
            && chosen.is_none_or(|c| s.mean_consensus > c.mean_consensus)
        {
            chosen = Some(s);
        }
    }
    let chosen_k = chosen.map_or(1, |s| s.k);
    Ok(ConsensusReport {
        per_k,
        chosen_k,
        homogeneous: chosen_k == 1,
        stability_threshold: cfg.stability_threshold,
        warnings,
        matrices,
    })
}
