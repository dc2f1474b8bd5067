//! Partition-based clustering: K-means, sparse K-means, PAM and
//! K-prototypes.

mod kmeans;
mod kprototypes;
mod pam;
mod sparse;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::RowMatrix;

pub use kmeans::{kmeans, kmeans_with, KMeansConfig};
pub use kprototypes::{default_gamma, kprototypes, kprototypes_with, KPrototypesConfig};
pub use pam::{best_single_medoid, pam};
pub use sparse::{
    choose_sparsity, choose_sparsity_with, default_sparsity_grid, sparse_kmeans, sparse_kmeans_with, update_weights,
    SparseConfig, SparsityChoice,
};

/// Cluster representatives, depending on the algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centers {
    Means(RowMatrix),
    Medoids(Vec<usize>),
    Prototypes { means: RowMatrix, modes: Vec<Vec<u32>> },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub k: usize,
    /// Label in `0..k` per subject; every label is used.
    pub assign: Vec<usize>,
    pub objective: f64,
    pub centers: Centers,
    /// Feature weights (sparse K-means only).
    pub weights: Option<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
}

impl ClusterResult {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.k];
        for &a in &self.assign {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Renumbers labels by order of first appearance.
pub fn relabel_by_first_appearance(assign: &[usize]) -> Vec<usize> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    assign
        .iter()
        .map(|&a| match map.iter().find(|(old, _)| *old == a) {
            Some(&(_, new)) => new,
            None => {
                let new = map.len();
                map.push((a, new));
                new
            }
        })
        .collect()
}
