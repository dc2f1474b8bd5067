use alloc::vec::Vec;

use super::{Centers, ClusterResult};
use crate::dissimilarity::DissimMatrix;
use crate::error::{Error, Result};

struct Nearest {
    /// Position in the medoid list of the nearest medoid.
    first: Vec<usize>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

fn nearest(dm: &DissimMatrix, medoids: &[usize]) -> Nearest {
    let n = dm.n();
    let mut first = alloc::vec![0; n];
    let mut d1 = alloc::vec![f64::INFINITY; n];
    let mut d2 = alloc::vec![f64::INFINITY; n];
    for j in 0..n {
        for (pos, &m) in medoids.iter().enumerate() {
            let d = dm.get(m, j);
            if d < d1[j] {
                d2[j] = d1[j];
                d1[j] = d;
                first[j] = pos;
            } else if d < d2[j] {
                d2[j] = d;
            }
        }
    }
    Nearest { first, d1, d2 }
}

/// The medoid of a single cluster holding every subject, and its cost.
pub fn best_single_medoid(dm: &DissimMatrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for i in 0..dm.n() {
        let cost: f64 = (0..dm.n()).map(|j| dm.get(i, j)).sum();
        if cost < best.1 {
            best = (i, cost);
        }
    }
    best
}

/// Partitioning around medoids: greedy BUILD, then SWAP passes applying the
/// single best improving swap until none improves. Deterministic; ties go to
/// the lowest index.
pub fn pam(dm: &DissimMatrix, k: usize) -> Result<ClusterResult> {
    let n = dm.n();
    if k < 2 || k >= n {
        return Err(Error::InvalidK { k, n });
    }
    let mut medoids = alloc::vec![best_single_medoid(dm).0];
    let mut d1: Vec<f64> = (0..n).map(|j| dm.get(medoids[0], j)).collect();
    while medoids.len() < k {
        let mut best = (usize::MAX, -1.0);
        for c in (0..n).filter(|c| !medoids.contains(c)) {
            let gain: f64 = (0..n).map(|j| (d1[j] - dm.get(c, j)).max(0.0)).sum();
            if gain > best.1 {
                best = (c, gain);
            }
        }
        medoids.push(best.0);
        for (j, v) in d1.iter_mut().enumerate() {
            *v = v.min(dm.get(best.0, j));
        }
    }

    let mut objective: f64 = d1.iter().sum();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let near = nearest(dm, &medoids);
        let mut best: Option<(usize, usize, f64)> = None;
        for pos in 0..k {
            for o in (0..n).filter(|o| !medoids.contains(o)) {
                let delta: f64 = (0..n)
                    .map(|j| {
                        let keep = if near.first[j] == pos {
                            near.d2[j]
                        } else {
                            near.d1[j]
                        };
                        keep.min(dm.get(o, j)) - near.d1[j]
                    })
                    .sum();
                if best.is_none_or(|b| delta < b.2) {
                    best = Some((pos, o, delta));
                }
            }
        }
        match best {
            Some((pos, o, delta)) if delta < -1e-12 * objective => {
                medoids[pos] = o;
                let next: f64 = nearest(dm, &medoids).d1.iter().sum();
                debug_assert!(next <= objective);
                objective = next;
            }
            _ => break,
        }
    }

    medoids.sort_unstable();
    let near = nearest(dm, &medoids);
    Ok(ClusterResult {
        k,
        assign: near.first,
        objective: near.d1.iter().sum(),
        centers: Centers::Medoids(medoids),
        weights: None,
        iterations,
        converged: true,
    })
}
