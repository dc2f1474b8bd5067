//! The two-step procedure: identify the structure of the continuous space,
//! select variables accordingly, then cluster the selection.
//!
//! Structure 1 (natural clusters) is declared when the OPTICS reachability
//! plot shows at least two troughs. Otherwise consensus K-means decides
//! between structure 2 (a stable partition with K >= 2) and structure 3
//! (homogeneous).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::consensus::{select_k, ConsensusConfig, ConsensusReport};
use crate::dataset::{standardize, MixedDataset, RowMatrix};
use crate::density::{detect_troughs_with, optics, OpticsParams, ReachabilityProfile, TroughParams, TroughReport};
use crate::dissimilarity::{hydap_dissim_matrix, DissimMatrix};
use crate::error::{Error, Result};
use crate::metrics::{bootstrap_bcss_screen, cramers_v, elbow, BcssScreen};
use crate::partition::{
    best_single_medoid, choose_sparsity_with, default_sparsity_grid, pam, sparse_kmeans_with, SparseConfig,
    SparsityChoice,
};
use crate::{math, rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Structure {
    Natural = 1,
    Partitioned = 2,
    Homogeneous = 3,
}

impl From<Structure> for u8 {
    fn from(s: Structure) -> u8 {
        s as u8
    }
}

impl TryFrom<u8> for Structure {
    type Error = String;
    fn try_from(v: u8) -> core::result::Result<Self, String> {
        match v {
            1 => Ok(Structure::Natural),
            2 => Ok(Structure::Partitioned),
            3 => Ok(Structure::Homogeneous),
            _ => Err(format!("unknown data structure {v}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SparseKmeans,
    ConsensusKmeans,
    PamHydap,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::SparseKmeans => "sparse-kmeans",
            Method::ConsensusKmeans => "consensus-kmeans",
            Method::PamHydap => "pam-hydap",
        }
    }
}

/// What to do when consensus K-means picks K = 2 on strongly correlated
/// continuous variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CautionAction {
    /// Keep the partition and attach a warning.
    #[default]
    Warn,
    /// Warn and treat the continuous space as homogeneous.
    Homogeneous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// OPTICS neighborhood size; `max(5, ceil(ln n))` when unset.
    pub min_pts: Option<usize>,
    pub troughs: TroughParams,
    pub consensus: ConsensusConfig,
    /// Continuous variables with a sparse K-means weight below this are
    /// dropped under structure 1.
    pub weight_threshold: f64,
    pub cramers_v_cutoff: f64,
    /// Candidate L1 bounds; log-spaced on [1.1, sqrt(h)] when unset.
    pub sparsity_grid: Option<Vec<f64>>,
    pub permutations: usize,
    pub sparse: SparseConfig,
    /// Run the bootstrap BCSS screen alongside the weight threshold and
    /// report disagreements.
    pub bcss_screen: bool,
    pub bcss_boots: usize,
    /// Largest K tried by the structure-3 elbow.
    pub elbow_k_max: usize,
    /// Correlation level of the K = 2 correlation caution.
    pub caution_r: f64,
    /// Fraction of continuous variable pairs above `caution_r` that
    /// triggers it.
    pub caution_frac: f64,
    pub caution_action: CautionAction,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            min_pts: None,
            troughs: TroughParams::default(),
            consensus: ConsensusConfig::default(),
            weight_threshold: 0.05,
            cramers_v_cutoff: 0.3,
            sparsity_grid: None,
            permutations: 25,
            sparse: SparseConfig::default(),
            bcss_screen: true,
            bcss_boots: 50,
            elbow_k_max: 6,
            caution_r: 0.3,
            caution_frac: 0.5,
            caution_action: CautionAction::Warn,
        }
    }
}

/// A kept variable with the statistic that justified it: the sparse K-means
/// weight or Cramér's V. Structure 2 keeps continuous variables without one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeptVariable {
    pub name: String,
    pub evidence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedVariable {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub structure: Structure,
    pub trough_count: usize,
    /// Consensus K-means choice (structures 2 and 3).
    pub consensus_k: Option<usize>,
    /// Cluster count carried into step 2; for structure 3 it is set by the
    /// elbow in step 2.
    pub k: usize,
    pub kept_continuous: Vec<KeptVariable>,
    pub kept_categorical: Vec<KeptVariable>,
    pub dropped: Vec<DroppedVariable>,
    pub warnings: Vec<String>,
}

impl StructureReport {
    pub fn selected(&self) -> Vec<String> {
        self.kept_continuous
            .iter()
            .chain(&self.kept_categorical)
            .map(|v| v.name.clone())
            .collect()
    }
}

/// Everything computed along the way.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip)]
    pub profile: Option<ReachabilityProfile>,
    pub troughs: Option<TroughReport>,
    pub consensus: Option<ConsensusReport>,
    pub sparsity: Option<SparsityChoice>,
    /// Sparse K-means weights on every continuous variable (structure 1).
    pub weights: Vec<Score>,
    /// Labels that drove the categorical screen (structures 1 and 2).
    #[serde(skip)]
    pub step1_assign: Option<Vec<usize>>,
    pub bcss_screen: Option<BcssScreen>,
    /// Cramér's V of every categorical variable against the step-1 labels,
    /// or the largest pairwise value under structure 3.
    pub cramers_v: Vec<Score>,
    /// (K, within-cluster sum of dissimilarities) for the structure-3 elbow.
    pub elbow: Vec<(usize, f64)>,
    /// Fraction of continuous variable pairs correlated above the caution
    /// level, computed when consensus K-means picks K = 2.
    pub correlated_pair_frac: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydapResult {
    pub report: StructureReport,
    pub k: usize,
    pub assign: Vec<usize>,
    pub method_used: Method,
    pub diagnostics: Diagnostics,
}

const TAG_CONSENSUS: u64 = 1;
const TAG_SPARSITY: u64 = 2;
const TAG_SPARSE_FIT: u64 = 3;
const TAG_BCSS: u64 = 4;
const TAG_STEP2: u64 = 5;

/// OPTICS on the standardized continuous block, then consensus K-means if
/// fewer than two troughs show. Variable lists are left empty.
pub fn identify_structure(
    ds: &MixedDataset,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<(StructureReport, Diagnostics)> {
    let mut diag = Diagnostics::default();
    let mut report = StructureReport {
        structure: Structure::Homogeneous,
        trough_count: 0,
        consensus_k: None,
        k: 1,
        kept_continuous: Vec::new(),
        kept_categorical: Vec::new(),
        dropped: Vec::new(),
        warnings: Vec::new(),
    };
    if ds.h() == 0 {
        report
            .warnings
            .push("no continuous variables: treated as homogeneous".to_string());
        return Ok((report, diag));
    }
    let view = standardize(ds)?;
    let params = OpticsParams {
        min_pts: cfg.min_pts.unwrap_or(OpticsParams::default_for(ds.n()).min_pts),
        eps: f64::INFINITY,
    };
    let profile = optics(&view.matrix, params)?;
    let troughs = detect_troughs_with(&profile, &cfg.troughs)?;
    report.trough_count = troughs.trough_count;
    diag.profile = Some(profile);
    diag.troughs = Some(troughs);
    if report.trough_count >= 2 {
        report.structure = Structure::Natural;
        report.k = report.trough_count;
        return Ok((report, diag));
    }

    let cons = select_k(&view.matrix, &cfg.consensus, rng::derive_seed(seed, TAG_CONSENSUS))?;
    report.warnings.extend(cons.warnings.iter().cloned());
    report.consensus_k = Some(cons.chosen_k);
    if cons.chosen_k >= 2 {
        report.structure = Structure::Partitioned;
        report.k = cons.chosen_k;
        diag.step1_assign = cons.chosen().map(|s| s.assign.clone());
    }
    if cons.chosen_k == 2 {
        let frac = correlated_pair_fraction(&view.matrix, cfg.caution_r);
        diag.correlated_pair_frac = frac;
        if frac.is_some_and(|f| f > cfg.caution_frac) {
            report.warnings.push(format!(
                "consensus K-means chose K=2 while most continuous pairs are correlated above {}; \
                 the split may follow the shared correlation rather than distinct groups",
                cfg.caution_r
            ));
            if cfg.caution_action == CautionAction::Homogeneous {
                report.structure = Structure::Homogeneous;
                report.k = 1;
                diag.step1_assign = None;
            }
        }
    }
    diag.consensus = Some(cons);
    Ok((report, diag))
}

/// Share of column pairs whose Pearson correlation exceeds `r`.
///
/// Computed on the whole sample: a K = 2 split driven by a shared factor cuts
/// along that factor, so correlations inside the found clusters understate
/// it.
fn correlated_pair_fraction(data: &RowMatrix, r: f64) -> Option<f64> {
    let h = data.cols();
    if h < 2 {
        return None;
    }
    let cols: Vec<Vec<f64>> = (0..h).map(|j| data.column(j)).collect();
    let mut high = 0usize;
    for a in 0..h {
        for b in a + 1..h {
            if math::pearson(&cols[a], &cols[b]) > r {
                high += 1;
            }
        }
    }
    Some(high as f64 / (h * (h - 1) / 2) as f64)
}

/// Fills in the kept and dropped variable lists.
pub fn select_variables(
    ds: &MixedDataset,
    report: &mut StructureReport,
    diag: &mut Diagnostics,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<()> {
    report.kept_continuous.clear();
    report.kept_categorical.clear();
    report.dropped.clear();
    diag.cramers_v.clear();
    let cont_names = ds.continuous_names();
    let cat_names = ds.categorical_names();

    match report.structure {
        Structure::Natural => {
            let view = standardize(ds)?;
            let grid = cfg
                .sparsity_grid
                .clone()
                .unwrap_or_else(|| default_sparsity_grid(view.h()));
            let choice = choose_sparsity_with(
                &view.matrix,
                report.k,
                &grid,
                cfg.permutations,
                rng::derive_seed(seed, TAG_SPARSITY),
                &cfg.sparse,
            )?;
            let fit = sparse_kmeans_with(
                &view.matrix,
                report.k,
                choice.s,
                rng::derive_seed(seed, TAG_SPARSE_FIT),
                &cfg.sparse,
            )?;
            let weights = fit.weights.clone().unwrap_or_default();
            for (name, &w) in cont_names.iter().zip(&weights) {
                diag.weights.push(Score {
                    name: name.clone(),
                    value: w,
                });
                if w >= cfg.weight_threshold {
                    report.kept_continuous.push(KeptVariable {
                        name: name.clone(),
                        evidence: Some(w),
                    });
                } else {
                    report.dropped.push(DroppedVariable {
                        name: name.clone(),
                        reason: format!("sparse K-means weight {w:.3} < {}", cfg.weight_threshold),
                    });
                }
            }
            if cfg.bcss_screen {
                let screen = bootstrap_bcss_screen(
                    &view.matrix,
                    &view.names,
                    report.k,
                    choice.s,
                    cfg.bcss_boots,
                    rng::derive_seed(seed, TAG_BCSS),
                )?;
                for e in &screen.entries {
                    let by_weight = report.kept_continuous.iter().any(|v| v.name == e.variable);
                    if by_weight != e.kept {
                        report.warnings.push(format!(
                            "`{}` is {} by the weight threshold but {} by the bootstrap BCSS screen",
                            e.variable,
                            if by_weight { "kept" } else { "dropped" },
                            if e.kept { "kept" } else { "dropped" },
                        ));
                    }
                }
                diag.bcss_screen = Some(screen);
            }
            diag.sparsity = Some(choice);
            diag.step1_assign = Some(fit.assign);
            screen_against_labels(ds, report, diag, cfg)?;
        }
        Structure::Partitioned => {
            for name in &cont_names {
                report.kept_continuous.push(KeptVariable {
                    name: name.clone(),
                    evidence: None,
                });
            }
            screen_against_labels(ds, report, diag, cfg)?;
        }
        Structure::Homogeneous => {
            for name in &cont_names {
                report.dropped.push(DroppedVariable {
                    name: name.clone(),
                    reason: "continuous variables are dropped under a homogeneous structure".into(),
                });
            }
            let cats = ds.categorical();
            for (j, name) in cat_names.iter().enumerate() {
                let best = (0..cats.len())
                    .filter(|&o| o != j)
                    .filter_map(|o| cramers_v(&cats[j], &cats[o]).ok())
                    .fold(None::<f64>, |m, v| Some(m.map_or(v, |m| m.max(v))));
                let v = best.unwrap_or(0.0);
                diag.cramers_v.push(Score {
                    name: name.clone(),
                    value: v,
                });
                if v >= cfg.cramers_v_cutoff {
                    report.kept_categorical.push(KeptVariable {
                        name: name.clone(),
                        evidence: Some(v),
                    });
                } else {
                    report.dropped.push(DroppedVariable {
                        name: name.clone(),
                        reason: match best {
                            Some(v) => format!("largest pairwise Cramér's V {v:.3} < {}", cfg.cramers_v_cutoff),
                            None => "no informative partner variable".into(),
                        },
                    });
                }
            }
        }
    }
    if report.kept_continuous.is_empty() && report.kept_categorical.is_empty() {
        return Err(Error::NothingSelected);
    }
    Ok(())
}

fn screen_against_labels(
    ds: &MixedDataset,
    report: &mut StructureReport,
    diag: &mut Diagnostics,
    cfg: &PipelineConfig,
) -> Result<()> {
    let labels = diag
        .step1_assign
        .clone()
        .ok_or_else(|| Error::InvalidParameter("no step-1 labels to screen against".into()))?;
    for (name, col) in ds.categorical_names().iter().zip(ds.categorical()) {
        match cramers_v(col, &labels) {
            Ok(v) => {
                diag.cramers_v.push(Score {
                    name: name.clone(),
                    value: v,
                });
                if v >= cfg.cramers_v_cutoff {
                    report.kept_categorical.push(KeptVariable {
                        name: name.clone(),
                        evidence: Some(v),
                    });
                } else {
                    report.dropped.push(DroppedVariable {
                        name: name.clone(),
                        reason: format!("Cramér's V {v:.3} < {}", cfg.cramers_v_cutoff),
                    });
                }
            }
            Err(Error::DegenerateTable) => report.dropped.push(DroppedVariable {
                name: name.clone(),
                reason: "constant variable".into(),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// Step 2 on the selected variables.
pub fn cluster_step2(
    ds: &MixedDataset,
    mut report: StructureReport,
    mut diag: Diagnostics,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<HydapResult> {
    let selected = report.selected();
    if selected.is_empty() {
        return Err(Error::NothingSelected);
    }
    let sub = ds.select(&selected)?;
    let all_continuous = report.kept_categorical.is_empty();

    let (assign, method) = match report.structure {
        Structure::Natural if all_continuous => {
            let view = standardize(&sub)?;
            let grid = cfg
                .sparsity_grid
                .clone()
                .map(|g| clamp_grid(&g, view.h()))
                .unwrap_or_else(|| default_sparsity_grid(view.h()));
            let step2_seed = rng::derive_seed(seed, TAG_STEP2);
            let choice = choose_sparsity_with(&view.matrix, report.k, &grid, cfg.permutations, step2_seed, &cfg.sparse)?;
            let fit = sparse_kmeans_with(
                &view.matrix,
                report.k,
                choice.s,
                rng::derive_seed(step2_seed, TAG_SPARSE_FIT),
                &cfg.sparse,
            )?;
            (fit.assign, Method::SparseKmeans)
        }
        Structure::Partitioned if all_continuous => {
            let labels = diag
                .step1_assign
                .clone()
                .ok_or_else(|| Error::InvalidParameter("missing consensus labels".into()))?;
            (labels, Method::ConsensusKmeans)
        }
        Structure::Natural | Structure::Partitioned => {
            let dm = hydap_dissim_matrix(&sub)?;
            (pam(&dm, report.k)?.assign, Method::PamHydap)
        }
        Structure::Homogeneous => {
            let dm = hydap_dissim_matrix(&sub)?;
            let (k, assign, curve) = elbow_pam(&dm, cfg.elbow_k_max)?;
            diag.elbow = curve;
            report.k = k;
            (assign, Method::PamHydap)
        }
    };
    let k = assign.iter().max().map_or(0, |m| m + 1);
    Ok(HydapResult {
        report,
        k,
        assign,
        method_used: method,
        diagnostics: diag,
    })
}

/// User grids may exceed sqrt(h) once variables have been dropped.
fn clamp_grid(grid: &[f64], h: usize) -> Vec<f64> {
    let max = libm::sqrt(h as f64).max(1.0);
    let mut g: Vec<f64> = grid.iter().map(|s| s.clamp(1.0, max)).collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// PAM for K = 2..=k_max, with the one-medoid cost as K = 1, and the K at the
/// elbow of the within-cluster dissimilarity curve.
fn elbow_pam(dm: &DissimMatrix, k_max: usize) -> Result<(usize, Vec<usize>, Vec<(usize, f64)>)> {
    let n = dm.n();
    let top = k_max.min(n.saturating_sub(1));
    if top < 2 {
        return Err(Error::InvalidK { k: k_max, n });
    }
    let mut curve = alloc::vec![(1, best_single_medoid(dm).1)];
    let mut fits = Vec::new();
    for k in 2..=top {
        let fit = pam(dm, k)?;
        curve.push((k, fit.objective));
        fits.push(fit);
    }
    let k = if curve.len() >= 3 {
        let ks: Vec<usize> = curve.iter().map(|c| c.0).collect();
        let obj: Vec<f64> = curve.iter().map(|c| c.1).collect();
        elbow(&ks, &obj)?
    } else {
        2
    };
    let assign = fits.swap_remove(k - 2).assign;
    Ok((k, assign, curve))
}

/// Both steps end to end.
pub fn run_hydap(ds: &MixedDataset, cfg: &PipelineConfig, seed: u64) -> Result<HydapResult> {
    let (mut report, mut diag) = identify_structure(ds, cfg, seed)?;
    select_variables(ds, &mut report, &mut diag, cfg, seed)?;
    cluster_step2(ds, report, diag, cfg, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::VariableMeta;
    use crate::metrics::ari;
    use crate::simgen::{generate, SimSetting, SimSpec};

    fn quick() -> PipelineConfig {
        PipelineConfig {
            bcss_screen: false,
            permutations: 10,
            consensus: ConsensusConfig {
                h_iters: 40,
                ..ConsensusConfig::default()
            },
            ..PipelineConfig::default()
        }
    }

    fn names(v: &[KeptVariable]) -> Vec<&str> {
        v.iter().map(|k| k.name.as_str()).collect()
    }

    fn accounted(ds: &MixedDataset, r: &StructureReport) {
        let mut seen: Vec<String> = r.selected();
        seen.extend(r.dropped.iter().map(|d| d.name.clone()));
        seen.sort();
        let mut all: Vec<String> = ds.meta().iter().map(|m| m.name.clone()).collect();
        all.sort();
        assert_eq!(seen, all);
    }

    #[test]
    fn natural_structure_drops_the_noise_variable() {
        let ld = generate(&SimSpec::new(SimSetting::Sim1a, 2)).unwrap();
        let r = run_hydap(&ld.dataset, &quick(), 2).unwrap();
        assert_eq!(r.report.structure, Structure::Natural);
        assert_eq!(r.k, 3);
        assert_eq!(names(&r.report.kept_continuous), ["x1", "x2", "x3"]);
        assert_eq!(names(&r.report.kept_categorical), ["x5"]);
        assert_eq!(r.method_used, Method::PamHydap);
        assert!(ari(&r.assign, &ld.truth).unwrap() > 0.9);
        accounted(&ld.dataset, &r.report);
    }

    #[test]
    fn all_continuous_selection_uses_sparse_kmeans() {
        let ld = generate(&SimSpec::new(SimSetting::Sim2a, 2)).unwrap();
        let r = run_hydap(&ld.dataset, &quick(), 2).unwrap();
        assert_eq!(r.report.structure, Structure::Natural);
        assert!(r.report.kept_categorical.is_empty());
        assert_eq!(r.method_used, Method::SparseKmeans);
        assert!(ari(&r.assign, &ld.truth).unwrap() > 0.9);
    }

    #[test]
    fn partitioned_structure_keeps_every_continuous_variable() {
        let ld = generate(&SimSpec::new(SimSetting::Sim1b, 1)).unwrap();
        let r = run_hydap(&ld.dataset, &quick(), 1).unwrap();
        assert_eq!(r.report.structure, Structure::Partitioned);
        assert_eq!(r.report.consensus_k, Some(3));
        assert_eq!(r.report.kept_continuous.len(), 11);
        assert_eq!(names(&r.report.kept_categorical), ["x13", "x14"]);
        assert_eq!(r.report.dropped[0].name, "x12");
        accounted(&ld.dataset, &r.report);
    }

    #[test]
    fn homogeneous_structure_clusters_the_associated_categoricals() {
        let ld = generate(&SimSpec::new(SimSetting::Sim3, 4)).unwrap();
        let r = run_hydap(&ld.dataset, &quick(), 4).unwrap();
        assert_eq!(r.report.structure, Structure::Homogeneous);
        assert_eq!(r.report.consensus_k, Some(1));
        assert!(r.report.kept_continuous.is_empty());
        assert_eq!(names(&r.report.kept_categorical), ["x5", "x7"]);
        assert_eq!(r.k, 3);
        assert_eq!(r.diagnostics.elbow.len(), 6);
        accounted(&ld.dataset, &r.report);
    }

    #[test]
    fn homogeneous_result_ignores_continuous_values() {
        let ld = generate(&SimSpec::new(SimSetting::Sim3, 4)).unwrap();
        let a = run_hydap(&ld.dataset, &quick(), 4).unwrap();
        let cat_only = ld.dataset.select(&ld.dataset.categorical_names()).unwrap();
        let b = run_hydap(&cat_only, &quick(), 4).unwrap();
        assert_eq!(b.report.structure, Structure::Homogeneous);
        assert_eq!(a.assign, b.assign);
    }

    #[test]
    fn nothing_selected_is_an_error() {
        let n = 60;
        let meta = alloc::vec![
            VariableMeta::continuous("z"),
            VariableMeta::categorical("a", &["p", "q"]),
            VariableMeta::categorical("b", &["p", "q"]),
        ];
        let z: Vec<f64> = (0..n).map(|i| libm::sin(i as f64 * 1.7)).collect();
        // a and b independent by construction: b alternates within each a level
        let a: Vec<u32> = (0..n).map(|i| u32::from(i >= n / 2)).collect();
        let b: Vec<u32> = (0..n).map(|i| (i % 2) as u32).collect();
        let ds = MixedDataset::new(meta, alloc::vec![z], alloc::vec![a, b]).unwrap();
        let mut report = StructureReport {
            structure: Structure::Homogeneous,
            trough_count: 0,
            consensus_k: Some(1),
            k: 1,
            kept_continuous: Vec::new(),
            kept_categorical: Vec::new(),
            dropped: Vec::new(),
            warnings: Vec::new(),
        };
        let mut diag = Diagnostics::default();
        assert_eq!(
            select_variables(&ds, &mut report, &mut diag, &quick(), 0),
            Err(Error::NothingSelected)
        );
    }

    #[test]
    fn deterministic() {
        let ld = generate(&SimSpec::new(SimSetting::Sim2b, 3)).unwrap();
        let a = run_hydap(&ld.dataset, &quick(), 11).unwrap();
        let b = run_hydap(&ld.dataset, &quick(), 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn correlation_caution() {
        let ld = generate(&SimSpec::new(SimSetting::Sim3, 0).correlated(0.4)).unwrap();
        let warned = run_hydap(&ld.dataset, &quick(), 0).unwrap();
        assert_eq!(warned.report.consensus_k, Some(2));
        assert_eq!(warned.report.structure, Structure::Partitioned);
        assert!(warned.diagnostics.correlated_pair_frac.unwrap() > 0.5);
        assert_eq!(warned.report.warnings.len(), 1);

        let cfg = PipelineConfig {
            caution_action: CautionAction::Homogeneous,
            ..quick()
        };
        let acted = run_hydap(&ld.dataset, &cfg, 0).unwrap();
        assert_eq!(acted.report.structure, Structure::Homogeneous);
        assert_eq!(names(&acted.report.kept_categorical), ["x5", "x7"]);
    }

    #[test]
    fn structure_serializes_as_its_number() {
        assert_eq!(serde_json::to_string(&Structure::Partitioned).unwrap(), "2");
        assert_eq!(serde_json::from_str::<Structure>("3").unwrap(), Structure::Homogeneous);
        assert!(serde_json::from_str::<Structure>("4").is_err());
    }
}
