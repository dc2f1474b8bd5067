//! OPTICS ordering and trough extraction on the reachability plot.
//!
//! Troughs are extracted with the ξ steep-area method: a cluster starts in a
//! region where reachability drops by at least a factor (1 - ξ) and ends in
//! a region where it rises by the same factor. The nested clusters found
//! this way form a hierarchy. Starting from the whole ordering, a cluster is
//! split into its maximal sub-clusters when there are at least two of them
//! and together they cover at least `split_coverage` of it; the troughs are
//! the clusters left unsplit. A lone small sub-cluster (a dense core inside
//! one trough) therefore never adds a trough.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{sq_dist, RowMatrix};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticsParams {
    /// Neighborhood size, counting the point itself.
    pub min_pts: usize,
    /// Neighborhood radius; `f64::INFINITY` gives the complete ordering.
    pub eps: f64,
}

impl OpticsParams {
    /// `min_pts = max(5, ceil(ln n))`, unbounded radius.
    pub fn default_for(n: usize) -> Self {
        let ln = libm::ceil(libm::log(n.max(1) as f64)) as usize;
        Self {
            min_pts: ln.max(5),
            eps: f64::INFINITY,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.min_pts < 2 {
            return Err(Error::InvalidParameter("min_pts must be >= 2".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParameter("eps must be > 0".into()));
        }
        Ok(())
    }
}

/// Output of [`optics`]. `reach` and `predecessor` are indexed by position in
/// the processing order, `core` by subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachabilityProfile {
    pub order: Vec<usize>,
    pub reach: Vec<Option<f64>>,
    pub predecessor: Vec<Option<usize>>,
    pub core: Vec<Option<f64>>,
    pub min_pts: usize,
}

impl ReachabilityProfile {
    pub fn n(&self) -> usize {
        self.order.len()
    }

    /// Reachability in plot order with undefined values as +inf.
    pub fn plot(&self) -> Vec<f64> {
        self.reach
            .iter()
            .map(|r| r.unwrap_or(f64::INFINITY))
            .collect()
    }

    /// Largest defined reachability value.
    pub fn max_defined(&self) -> Option<f64> {
        self.reach.iter().flatten().copied().reduce(f64::max)
    }

    /// Reachability value of each subject (undefined for the start points).
    pub fn by_subject(&self) -> Vec<Option<f64>> {
        let mut out = vec![None; self.n()];
        for (pos, &s) in self.order.iter().enumerate() {
            out[s] = self.reach[pos];
        }
        out
    }
}

/// OPTICS under Euclidean distance. Each new component starts at the lowest
/// unprocessed index; among seeds the smallest reachability wins, ties going
/// to the lower index.
pub fn optics(data: &RowMatrix, params: OpticsParams) -> Result<ReachabilityProfile> {
    params.validate()?;
    let n = data.rows();
    if n < params.min_pts {
        return Err(Error::TooFewSubjects {
            n,
            required: params.min_pts,
        });
    }
    let dist = |a: usize, b: usize| libm::sqrt(sq_dist(data.row(a), data.row(b)));

    let core: Vec<Option<f64>> = par::map_range(n, |i| {
        let mut d: Vec<f64> = (0..n).map(|j| dist(i, j)).collect();
        let k = params.min_pts - 1;
        let (_, kth, _) = d.select_nth_unstable_by(k, f64::total_cmp);
        let c = *kth;
        (c <= params.eps).then_some(c)
    });

    let mut processed = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut order = Vec::with_capacity(n);
    let mut reach = Vec::with_capacity(n);
    let mut predecessor = Vec::with_capacity(n);

    let mut next_start = 0;
    while order.len() < n {
        while processed[next_start] {
            next_start += 1;
        }
        let mut current = next_start;
        let mut current_reach = None;
        loop {
            processed[current] = true;
            order.push(current);
            reach.push(current_reach);
            predecessor.push(pred[current]);
            if let Some(c) = core[current] {
                for q in 0..n {
                    if processed[q] {
                        continue;
                    }
                    let d = dist(current, q);
                    if d > params.eps {
                        continue;
                    }
                    let r = c.max(d);
                    if r < best[q] {
                        best[q] = r;
                        pred[q] = Some(current);
                    }
                }
            }
            let mut pick: Option<usize> = None;
            for q in 0..n {
                if !processed[q] && best[q].is_finite() && pick.is_none_or(|p| best[q] < best[p]) {
                    pick = Some(q);
                }
            }
            match pick {
                Some(q) => {
                    current = q;
                    current_reach = Some(best[q]);
                }
                None => break,
            }
        }
    }

    Ok(ReachabilityProfile {
        order,
        reach,
        predecessor,
        core,
        min_pts: params.min_pts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TroughParams {
    pub xi: f64,
    pub min_cluster_frac: f64,
    pub split_coverage: f64,
}

impl Default for TroughParams {
    fn default() -> Self {
        Self {
            xi: 0.05,
            min_cluster_frac: 0.05,
            split_coverage: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TroughReport {
    pub trough_count: usize,
    /// Inclusive (start, end) plot positions of the troughs.
    pub boundaries: Vec<(usize, usize)>,
    pub xi: f64,
    pub min_cluster_size: usize,
    pub split_coverage: f64,
    /// Every extracted cluster, nested ones included.
    pub clusters: Vec<(usize, usize)>,
}

impl TroughReport {
    /// Trough index per subject, `None` outside every trough.
    pub fn subject_labels(&self, profile: &ReachabilityProfile) -> Vec<Option<usize>> {
        let mut out = vec![None; profile.n()];
        for (t, &(s, e)) in self.boundaries.iter().enumerate() {
            for pos in s..=e {
                out[profile.order[pos]] = Some(t);
            }
        }
        out
    }
}

/// ξ extraction with minimum cluster size `max(min_pts, ceil(frac * n))` and
/// the default split coverage.
pub fn detect_troughs(
    profile: &ReachabilityProfile,
    xi: f64,
    min_cluster_frac: f64,
) -> Result<TroughReport> {
    detect_troughs_with(
        profile,
        &TroughParams {
            xi,
            min_cluster_frac,
            ..TroughParams::default()
        },
    )
}

pub fn detect_troughs_with(profile: &ReachabilityProfile, params: &TroughParams) -> Result<TroughReport> {
    let TroughParams {
        xi,
        min_cluster_frac,
        split_coverage,
    } = *params;
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::InvalidParameter("xi must lie in (0, 1)".into()));
    }
    if !(0.0..=1.0).contains(&split_coverage) {
        return Err(Error::InvalidParameter("split_coverage must lie in [0, 1]".into()));
    }
    let n = profile.n();
    let min_cluster_size = profile
        .min_pts
        .max(libm::ceil(min_cluster_frac.max(0.0) * n as f64) as usize)
        .max(2);
    let mut clusters = xi_clusters(
        &profile.plot(),
        &profile.predecessor,
        &profile.order,
        xi,
        profile.min_pts,
        min_cluster_size,
    );
    clusters.sort_unstable();
    clusters.dedup();

    let mut boundaries = Vec::new();
    if n > 0 {
        let root = (0, n - 1);
        let top = children(&clusters, root);
        if splits(&top, root, split_coverage) {
            for c in top {
                collect_troughs(&clusters, c, split_coverage, &mut boundaries);
            }
        } else if let Some(&largest) = top.iter().max_by_key(|c| (c.1 - c.0, usize::MAX - c.0)) {
            boundaries.push(largest);
        }
    }
    boundaries.sort_unstable();
    Ok(TroughReport {
        trough_count: boundaries.len(),
        boundaries,
        xi,
        min_cluster_size,
        split_coverage,
        clusters,
    })
}

/// Maximal clusters strictly inside `node`.
fn children(clusters: &[(usize, usize)], node: (usize, usize)) -> Vec<(usize, usize)> {
    let inside: Vec<(usize, usize)> = clusters
        .iter()
        .copied()
        .filter(|&c| c != node && node.0 <= c.0 && c.1 <= node.1)
        .collect();
    inside
        .iter()
        .copied()
        .filter(|&c| !inside.iter().any(|&o| o != c && o.0 <= c.0 && c.1 <= o.1))
        .collect()
}

fn splits(kids: &[(usize, usize)], node: (usize, usize), coverage: f64) -> bool {
    let covered: usize = kids.iter().map(|c| c.1 - c.0 + 1).sum();
    kids.len() >= 2 && covered as f64 >= coverage * (node.1 - node.0 + 1) as f64
}

fn collect_troughs(
    clusters: &[(usize, usize)],
    node: (usize, usize),
    coverage: f64,
    out: &mut Vec<(usize, usize)>,
) {
    let kids = children(clusters, node);
    if splits(&kids, node, coverage) {
        for c in kids {
            collect_troughs(clusters, c, coverage, out);
        }
    } else {
        out.push(node);
    }
}

#[derive(Debug, Clone, Copy)]
struct SteepDown {
    start: usize,
    end: usize,
    mib: f64,
}

fn extend_region(steep: &[bool], xward: &[bool], start: usize, min_samples: usize) -> usize {
    let mut non_xward = 0;
    let mut end = start;
    for index in start..steep.len() {
        if steep[index] {
            non_xward = 0;
            end = index;
        } else if !xward[index] {
            non_xward += 1;
            if non_xward > min_samples {
                break;
            }
        } else {
            return end;
        }
    }
    end
}

fn filter_sdas(sdas: &mut Vec<SteepDown>, mib: f64, xi_c: f64, plot: &[f64]) {
    if mib.is_infinite() {
        sdas.clear();
        return;
    }
    sdas.retain(|d| mib <= plot[d.start] * xi_c);
    for d in sdas.iter_mut() {
        d.mib = d.mib.max(mib);
    }
}

// A cluster must contain the predecessor of its last point; trims the end
// until that holds.
fn correct_predecessor(
    plot: &[f64],
    predecessor: &[Option<usize>],
    order: &[usize],
    s: usize,
    mut e: usize,
) -> Option<(usize, usize)> {
    while s < e {
        if plot[s] > plot[e] {
            return Some((s, e));
        }
        if let Some(p) = predecessor[e] {
            if order[s..e].contains(&p) {
                return Some((s, e));
            }
        }
        e -= 1;
    }
    None
}

fn xi_clusters(
    reach: &[f64],
    predecessor: &[Option<usize>],
    order: &[usize],
    xi: f64,
    min_samples: usize,
    min_cluster_size: usize,
) -> Vec<(usize, usize)> {
    let n = reach.len();
    // trailing +inf closes a cluster that runs to the end of the plot
    let mut plot = reach.to_vec();
    plot.push(f64::INFINITY);
    let xi_c = 1.0 - xi;

    let ratio: Vec<f64> = (0..n).map(|i| plot[i] / plot[i + 1]).collect();
    let steep_up: Vec<bool> = ratio.iter().map(|&r| r <= xi_c).collect();
    let steep_down: Vec<bool> = ratio.iter().map(|&r| r >= 1.0 / xi_c).collect();
    let downward: Vec<bool> = ratio.iter().map(|&r| r > 1.0).collect();
    let upward: Vec<bool> = ratio.iter().map(|&r| r < 1.0).collect();

    let mut sdas: Vec<SteepDown> = Vec::new();
    let mut clusters = Vec::new();
    let mut index = 0;
    let mut mib = 0.0f64;

    for steep_index in (0..n).filter(|&i| steep_up[i] || steep_down[i]) {
        if steep_index < index {
            continue;
        }
        mib = plot[index..=steep_index].iter().copied().fold(mib, f64::max);

        if steep_down[steep_index] {
            filter_sdas(&mut sdas, mib, xi_c, &plot);
            let d_end = extend_region(&steep_down, &upward, steep_index, min_samples);
            sdas.push(SteepDown {
                start: steep_index,
                end: d_end,
                mib: 0.0,
            });
            index = d_end + 1;
            mib = plot[index];
        } else {
            filter_sdas(&mut sdas, mib, xi_c, &plot);
            let u_start = steep_index;
            let u_end = extend_region(&steep_up, &downward, u_start, min_samples);
            index = u_end + 1;
            mib = plot[index];

            let mut found = Vec::new();
            for d in &sdas {
                let mut c_start = d.start;
                let mut c_end = u_end;
                if plot[c_end + 1] * xi_c < d.mib {
                    continue;
                }
                let d_max = plot[d.start];
                if d_max * xi_c >= plot[c_end + 1] {
                    while plot[c_start + 1] > plot[c_end + 1] && c_start < d.end {
                        c_start += 1;
                    }
                } else if plot[c_end + 1] * xi_c >= d_max {
                    while plot[c_end - 1] > d_max && c_end > u_start {
                        c_end -= 1;
                    }
                }
                let Some((s, e)) = correct_predecessor(&plot, predecessor, order, c_start, c_end)
                else {
                    continue;
                };
                if e - s + 1 < min_cluster_size || s > d.end || e < u_start {
                    continue;
                }
                found.push((s, e));
            }
            found.reverse();
            clusters.extend(found);
        }
    }
    clusters
}
