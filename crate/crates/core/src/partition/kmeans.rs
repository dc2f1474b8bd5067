use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Centers, ClusterResult};
use crate::dataset::{sq_dist, RowMatrix};
use crate::error::{Error, Result};
use crate::{par, rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
    /// Relative WCSS change below which Lloyd iterations stop.
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 300,
            tol: 1e-8,
        }
    }
}

/// Lloyd K-means from k-means++ seeding; best of `restarts` runs by WCSS.
pub fn kmeans(data: &RowMatrix, k: usize, seed: u64, restarts: usize) -> Result<ClusterResult> {
    kmeans_with(
        data,
        k,
        seed,
        &KMeansConfig {
            restarts,
            ..KMeansConfig::default()
        },
    )
}

pub fn kmeans_with(
    data: &RowMatrix,
    k: usize,
    seed: u64,
    cfg: &KMeansConfig,
) -> Result<ClusterResult> {
    kmeans_warm(data, k, seed, cfg, None)
}

/// Like [`kmeans_with`], additionally trying `warm` as one starting
/// configuration.
pub(crate) fn kmeans_warm(
    data: &RowMatrix,
    k: usize,
    seed: u64,
    cfg: &KMeansConfig,
    warm: Option<&[usize]>,
) -> Result<ClusterResult> {
    let n = data.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    let runs = cfg.restarts.max(1);
    let mut results: Vec<ClusterResult> = par::map_range(runs, |r| {
        let mut g = rng::stream(seed, r as u64);
        let init = kmeans_pp(data, k, &mut g);
        lloyd(data, init, cfg)
    });
    if let Some(labels) = warm {
        if let Some(init) = means_of(data, labels, k) {
            results.push(lloyd(data, init, cfg));
        }
    }
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.objective < results[best].objective {
            best = i;
        }
    }
    Ok(results.swap_remove(best))
}

fn kmeans_pp(data: &RowMatrix, k: usize, g: &mut rng::Rng) -> RowMatrix {
    let n = data.rows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(g.random_range(0..n));
    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(data.row(i), data.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut u = g.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            // guard against landing on a zero-weight point through rounding
            if d2[pick] == 0.0 {
                pick = d2.iter().position(|&w| w > 0.0).unwrap_or(pick);
            }
            pick
        } else {
            g.random_range(0..n)
        };
        chosen.push(next);
        for (i, v) in d2.iter_mut().enumerate() {
            *v = v.min(sq_dist(data.row(i), data.row(next)));
        }
    }
    data.select_rows(&chosen)
}

/// Per-cluster means, or `None` when the labels do not use all k clusters.
pub(crate) fn means_of(data: &RowMatrix, labels: &[usize], k: usize) -> Option<RowMatrix> {
    let h = data.cols();
    let mut sums = RowMatrix::zeros(k, h);
    let mut counts = vec![0usize; k];
    for (i, &c) in labels.iter().enumerate() {
        if c >= k {
            return None;
        }
        counts[c] += 1;
        for (s, v) in sums.row_mut(c).iter_mut().zip(data.row(i)) {
            *s += v;
        }
    }
    if counts.contains(&0) {
        return None;
    }
    for (c, &m) in counts.iter().enumerate() {
        for s in sums.row_mut(c) {
            *s /= m as f64;
        }
    }
    Some(sums)
}

fn nearest(point: &[f64], centers: &RowMatrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centers.rows() {
        let d = sq_dist(point, centers.row(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn wcss(data: &RowMatrix, labels: &[usize], centers: &RowMatrix) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &c)| sq_dist(data.row(i), centers.row(c)))
        .sum()
}

// Moves the point farthest from its center (among clusters that can spare
// one) into each empty cluster.
fn repair_empty(data: &RowMatrix, labels: &mut [usize], centers: &RowMatrix, k: usize) {
    loop {
        let mut counts = vec![0usize; k];
        for &c in labels.iter() {
            counts[c] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut far = None;
        let mut far_d = -1.0;
        for (i, &c) in labels.iter().enumerate() {
            if counts[c] > 1 {
                let d = sq_dist(data.row(i), centers.row(c));
                if d > far_d {
                    far_d = d;
                    far = Some(i);
                }
            }
        }
        match far {
            Some(i) => labels[i] = empty,
            None => return,
        }
    }
}

pub(crate) fn lloyd(data: &RowMatrix, init: RowMatrix, cfg: &KMeansConfig) -> ClusterResult {
    let k = init.rows();
    let n = data.rows();
    let mut labels: Vec<usize> = (0..n).map(|i| nearest(data.row(i), &init).0).collect();
    repair_empty(data, &mut labels, &init, k);
    let mut centers = means_of(data, &labels, k).expect("all clusters occupied");
    let mut objective = wcss(data, &labels, &centers);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        let mut next: Vec<usize> = (0..n).map(|i| nearest(data.row(i), &centers).0).collect();
        repair_empty(data, &mut next, &centers, k);
        let changed = next != labels;
        labels = next;
        centers = means_of(data, &labels, k).expect("all clusters occupied");
        let obj = wcss(data, &labels, &centers);
        debug_assert!(
            obj <= objective * (1.0 + 1e-10) + 1e-12,
            "K-means objective increased: {objective} -> {obj}"
        );
        let rel = if objective > 0.0 {
            (objective - obj).abs() / objective
        } else {
            0.0
        };
        objective = obj;
        if !changed || rel < cfg.tol {
            converged = true;
            break;
        }
    }
    ClusterResult {
        k,
        assign: labels,
        objective,
        centers: Centers::Means(centers),
        weights: None,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ari;

    fn blobs() -> (RowMatrix, Vec<usize>) {
        let mut g = rng::seeded(3);
        let mut rows = Vec::new();
        let mut truth = Vec::new();
        for c in 0..2 {
            for _ in 0..30 {
                let centre = if c == 0 { -10.0 } else { 10.0 };
                rows.push(vec![
                    centre + g.random::<f64>() - 0.5,
                    g.random::<f64>() - 0.5,
                ]);
                truth.push(c);
            }
        }
        (RowMatrix::from_rows(&rows).unwrap(), truth)
    }

    #[test]
    fn single_cluster_objective_is_total_sum_of_squares() {
        let (m, _) = blobs();
        let r = kmeans(&m, 1, 1, 3).unwrap();
        let tss: f64 = (0..m.cols())
            .map(|j| {
                let c = m.column(j);
                let mu = crate::math::mean(&c);
                c.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>()
            })
            .sum();
        assert!((r.objective - tss).abs() < 1e-9 * tss);
        assert!(r.assign.iter().all(|&a| a == 0));
    }

    #[test]
    fn singleton_clusters_have_zero_objective() {
        let (m, _) = blobs();
        let small = m.select_rows(&[0, 1, 2, 40, 41]);
        let r = kmeans(&small, 5, 9, 2).unwrap();
        assert!(r.objective.abs() < 1e-12);
        assert_eq!(r.cluster_sizes(), vec![1; 5]);
    }

    #[test]
    fn separated_blobs_are_recovered() {
        let (m, truth) = blobs();
        let r = kmeans(&m, 2, 5, 10).unwrap();
        assert_eq!(ari(&r.assign, &truth).unwrap(), 1.0);
        assert!(r.converged);
    }

    #[test]
    fn duplicate_points_keep_every_cluster_occupied() {
        let m = RowMatrix::new(6, 1, vec![1.0, 1.0, 1.0, 1.0, 2.0, 2.0]).unwrap();
        let r = kmeans(&m, 4, 0, 3).unwrap();
        assert!(r.cluster_sizes().iter().all(|&s| s > 0));
    }

    #[test]
    fn invalid_k() {
        let (m, _) = blobs();
        assert_eq!(kmeans(&m, 0, 0, 1), Err(Error::InvalidK { k: 0, n: 60 }));
        assert_eq!(kmeans(&m, 61, 0, 1), Err(Error::InvalidK { k: 61, n: 60 }));
    }

    #[test]
    fn deterministic_given_seed() {
        let (m, _) = blobs();
        assert_eq!(kmeans(&m, 3, 11, 4).unwrap(), kmeans(&m, 3, 11, 4).unwrap());
    }
}
