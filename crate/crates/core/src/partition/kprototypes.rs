use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Centers, ClusterResult};
use crate::dataset::{sq_dist, MixedDataset, RowMatrix};
use crate::error::{Error, Result};
use crate::{math, par, rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KPrototypesConfig {
    /// Categorical mismatch weight; `None` uses [`default_gamma`].
    pub gamma: Option<f64>,
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KPrototypesConfig {
    fn default() -> Self {
        Self {
            gamma: None,
            restarts: 10,
            max_iter: 100,
        }
    }
}

/// Mean sample variance of the continuous columns over the mean Gini
/// impurity `1 - sum p_l^2` of the categorical ones, so that both blocks
/// contribute on comparable scales. 1 when either block is absent or every
/// categorical column is constant (the weight is then irrelevant).
pub fn default_gamma(ds: &MixedDataset) -> f64 {
    let cat = ds.categorical().len();
    if ds.h() == 0 || cat == 0 {
        return 1.0;
    }
    let vars: Vec<f64> = ds.continuous().iter().map(|c| math::sample_variance(c)).collect();
    let n = ds.n() as f64;
    let impurity: Vec<f64> = (0..cat)
        .map(|j| {
            1.0 - ds
                .level_counts(j)
                .iter()
                .map(|&c| (c as f64 / n) * (c as f64 / n))
                .sum::<f64>()
        })
        .collect();
    let gini = math::mean(&impurity);
    if gini > 0.0 {
        math::mean(&vars) / gini
    } else {
        1.0
    }
}

pub fn kprototypes(
    ds: &MixedDataset,
    k: usize,
    gamma: Option<f64>,
    seed: u64,
    restarts: usize,
) -> Result<ClusterResult> {
    kprototypes_with(
        ds,
        k,
        seed,
        &KPrototypesConfig {
            gamma,
            restarts,
            ..KPrototypesConfig::default()
        },
    )
}

struct Prototypes {
    means: RowMatrix,
    modes: Vec<Vec<u32>>,
}

struct Rows {
    num: RowMatrix,
    cat: Vec<Vec<u32>>,
    levels: Vec<usize>,
    gamma: f64,
}

impl Rows {
    fn cost(&self, i: usize, p: &Prototypes, c: usize) -> f64 {
        let mism = self.cat[i]
            .iter()
            .zip(&p.modes[c])
            .filter(|(a, b)| a != b)
            .count();
        sq_dist(self.num.row(i), p.means.row(c)) + self.gamma * mism as f64
    }

    fn pair(&self, i: usize, j: usize) -> f64 {
        let mism = self.cat[i].iter().zip(&self.cat[j]).filter(|(a, b)| a != b).count();
        sq_dist(self.num.row(i), self.num.row(j)) + self.gamma * mism as f64
    }

    fn nearest(&self, i: usize, p: &Prototypes) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for c in 0..p.modes.len() {
            let d = self.cost(i, p, c);
            if d < best.1 {
                best = (c, d);
            }
        }
        best
    }

    fn from_subjects(&self, idx: &[usize]) -> Prototypes {
        Prototypes {
            means: self.num.select_rows(idx),
            modes: idx.iter().map(|&i| self.cat[i].clone()).collect(),
        }
    }

    fn update(&self, labels: &[usize], k: usize) -> Prototypes {
        let h = self.num.cols();
        let mut means = RowMatrix::zeros(k, h);
        let mut counts = vec![0usize; k];
        let mut tallies: Vec<Vec<Vec<usize>>> = (0..k)
            .map(|_| self.levels.iter().map(|&l| vec![0; l]).collect())
            .collect();
        for (i, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            for (s, v) in means.row_mut(c).iter_mut().zip(self.num.row(i)) {
                *s += v;
            }
            for (j, &v) in self.cat[i].iter().enumerate() {
                tallies[c][j][v as usize] += 1;
            }
        }
        for (c, &m) in counts.iter().enumerate() {
            for s in means.row_mut(c) {
                *s /= m.max(1) as f64;
            }
        }
        let modes = tallies
            .iter()
            .map(|vars| {
                vars.iter()
                    .map(|t| {
                        // first maximum: ties go to the lowest level index
                        let mut best = 0;
                        for (l, &cnt) in t.iter().enumerate() {
                            if cnt > t[best] {
                                best = l;
                            }
                        }
                        best as u32
                    })
                    .collect()
            })
            .collect();
        Prototypes { means, modes }
    }

    fn repair_empty(&self, labels: &mut [usize], p: &Prototypes, k: usize) {
        loop {
            let mut counts = vec![0usize; k];
            for &c in labels.iter() {
                counts[c] += 1;
            }
            let Some(empty) = counts.iter().position(|&c| c == 0) else {
                return;
            };
            let far = labels
                .iter()
                .enumerate()
                .filter(|(_, &c)| counts[c] > 1)
                .map(|(i, &c)| (i, self.cost(i, p, c)))
                .fold(None, |acc: Option<(usize, f64)>, x| match acc {
                    Some(a) if a.1 >= x.1 => Some(a),
                    _ => Some(x),
                });
            match far {
                Some((i, _)) => labels[i] = empty,
                None => return,
            }
        }
    }

    fn run(&self, k: usize, g: &mut rng::Rng, max_iter: usize) -> ClusterResult {
        let n = self.num.rows();
        // k-means++-style seeding under the mixed cost
        let mut chosen = vec![g.random_range(0..n)];
        let mut d: Vec<f64> = (0..n).map(|i| self.pair(i, chosen[0])).collect();
        while chosen.len() < k {
            let total: f64 = d.iter().sum();
            let next = if total > 0.0 {
                let mut u = g.random::<f64>() * total;
                let mut pick = d.iter().rposition(|&w| w > 0.0).unwrap_or(n - 1);
                for (i, &w) in d.iter().enumerate() {
                    if u < w {
                        pick = i;
                        break;
                    }
                    u -= w;
                }
                pick
            } else {
                g.random_range(0..n)
            };
            chosen.push(next);
            for (i, v) in d.iter_mut().enumerate() {
                *v = v.min(self.pair(i, next));
            }
        }
        let mut protos = self.from_subjects(&chosen);
        let mut labels: Vec<usize> = (0..n).map(|i| self.nearest(i, &protos).0).collect();
        self.repair_empty(&mut labels, &protos, k);
        let mut iterations = 0;
        let mut converged = false;
        while iterations < max_iter {
            iterations += 1;
            protos = self.update(&labels, k);
            let mut next: Vec<usize> = (0..n).map(|i| self.nearest(i, &protos).0).collect();
            self.repair_empty(&mut next, &protos, k);
            if next == labels {
                converged = true;
                break;
            }
            labels = next;
        }
        let protos = self.update(&labels, k);
        let objective = (0..n).map(|i| self.cost(i, &protos, labels[i])).sum();
        ClusterResult {
            k,
            assign: labels,
            objective,
            centers: Centers::Prototypes {
                means: protos.means,
                modes: protos.modes,
            },
            weights: None,
            iterations,
            converged,
        }
    }
}

/// K-prototypes on the raw continuous block plus γ-weighted categorical
/// mismatches.
pub fn kprototypes_with(
    ds: &MixedDataset,
    k: usize,
    seed: u64,
    cfg: &KPrototypesConfig,
) -> Result<ClusterResult> {
    let n = ds.n();
    if k < 2 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    let gamma = cfg.gamma.unwrap_or_else(|| default_gamma(ds));
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!("gamma must be >= 0, got {gamma}")));
    }
    let rows = Rows {
        num: ds.continuous_matrix(),
        cat: (0..n)
            .map(|i| ds.categorical().iter().map(|c| c[i]).collect())
            .collect(),
        levels: ds.categorical_meta().map(|m| m.levels.len()).collect(),
        gamma,
    };
    let mut runs = par::map_range(cfg.restarts.max(1), |r| {
        rows.run(k, &mut rng::stream(seed, r as u64), cfg.max_iter)
    });
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.objective < runs[best].objective {
            best = i;
        }
    }
    Ok(runs.swap_remove(best))
}
