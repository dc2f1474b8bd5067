//! Method dispatch and the replicated simulation benchmark.

use std::fmt::Write as _;

use hydap_core::dissimilarity::{famd_factor_matrix, pairwise_matrix};
use hydap_core::math::{median, percentile};
use hydap_core::metrics::ari;
use hydap_core::mixture::{fmm_fit_with, fmm_posterior, FmmModel};
use hydap_core::partition::{kprototypes_with, pam};
use hydap_core::pipeline::{run_hydap, HydapResult};
use hydap_core::simgen::SimSetting;
use hydap_core::{rng, ClusterResult, Measure, MixedDataset};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::sim::{replicate, replicate_seed};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Hydap,
    PamGower,
    Kproto,
    Fmm,
    PamFamd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Hydap,
        Algorithm::PamGower,
        Algorithm::Kproto,
        Algorithm::Fmm,
        Algorithm::PamFamd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Hydap => "hydap",
            Algorithm::PamGower => "pam-gower",
            Algorithm::Kproto => "kproto",
            Algorithm::Fmm => "fmm",
            Algorithm::PamFamd => "pam-famd",
        }
    }

    /// Row label used in benchmark tables.
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Hydap => "HyDaP",
            Algorithm::PamGower => "PAM + Gower distance",
            Algorithm::Kproto => "K-prototypes",
            Algorithm::Fmm => "Finite mixture model",
            Algorithm::PamFamd => "PAM + FAMD distance",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }

    fn index(self) -> u64 {
        self as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitDetail {
    Hydap(Box<HydapResult>),
    Partition(ClusterResult),
    Mixture(FmmModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub algorithm: Algorithm,
    pub k: usize,
    pub assign: Vec<usize>,
    pub detail: FitDetail,
}

/// Runs one method. HyDaP chooses its own K; the comparators need `k`,
/// except the mixture model, which picks K in 1..=6 by BIC without one.
pub fn fit(ds: &MixedDataset, algorithm: Algorithm, k: Option<usize>, cfg: &Config, seed: u64) -> Result<Fit> {
    let need_k = || k.ok_or_else(|| Error::Usage(format!("{} needs a cluster count (--k)", algorithm.name())));
    let partition = |r: ClusterResult| Fit {
        algorithm,
        k: r.k,
        assign: r.assign.clone(),
        detail: FitDetail::Partition(r),
    };
    Ok(match algorithm {
        Algorithm::Hydap => {
            let r = run_hydap(ds, &cfg.pipeline, seed)?;
            Fit {
                algorithm,
                k: r.k,
                assign: r.assign.clone(),
                detail: FitDetail::Hydap(Box::new(r)),
            }
        }
        Algorithm::PamGower => partition(pam(&pairwise_matrix(ds, Measure::Gower)?, need_k()?)?),
        Algorithm::PamFamd => partition(pam(&famd_factor_matrix(ds), need_k()?)?),
        Algorithm::Kproto => partition(kprototypes_with(ds, need_k()?, seed, &cfg.kprototypes)?),
        Algorithm::Fmm => {
            let model = match k {
                Some(k) => fmm_fit_with(ds, k, seed, &cfg.fmm)?,
                None => {
                    let mut best: Option<FmmModel> = None;
                    for k in 1..=6 {
                        let m = fmm_fit_with(ds, k, rng::derive_seed(seed, k as u64), &cfg.fmm)?;
                        if best.as_ref().is_none_or(|b| m.bic < b.bic) {
                            best = Some(m);
                        }
                    }
                    best.expect("at least one fit")
                }
            };
            let assign = fmm_posterior(&model, ds)?.hard_assign();
            Fit {
                algorithm,
                k: model.k,
                assign,
                detail: FitDetail::Mixture(model),
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchPlan {
    pub settings: Vec<SimSetting>,
    pub methods: Vec<Algorithm>,
    pub replicates: usize,
    pub seed: u64,
    /// Within-cluster correlation; `None` for independent variables.
    pub rho: Option<f64>,
}

/// One (setting, method, replicate) fit. Failed fits keep the error and no
/// ARI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRun {
    pub setting: SimSetting,
    pub method: Algorithm,
    pub replicate: usize,
    pub ari: Option<f64>,
    pub k: Option<usize>,
    pub error: Option<String>,
    #[serde(skip)]
    pub hydap: Option<Box<HydapResult>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    pub setting: SimSetting,
    pub method: Algorithm,
    pub median: f64,
    pub p025: f64,
    pub p975: f64,
    pub runs: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub plan: BenchPlan,
    pub cells: Vec<BenchCell>,
    pub runs: Vec<BenchRun>,
}

impl BenchTable {
    pub fn cell(&self, setting: SimSetting, method: Algorithm) -> Option<&BenchCell> {
        self.cells
            .iter()
            .find(|c| c.setting == setting && c.method == method)
    }

    pub fn runs_for(&self, setting: SimSetting, method: Algorithm) -> impl Iterator<Item = &BenchRun> {
        self.runs
            .iter()
            .filter(move |r| r.setting == setting && r.method == method)
    }

    /// Methods as rows, settings as columns, cells "median (p2.5, p97.5)".
    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "| Method |");
        for st in &self.plan.settings {
            let _ = write!(s, " {} |", st.name());
        }
        let _ = write!(s, "\n|---|");
        for _ in &self.plan.settings {
            let _ = write!(s, "---|");
        }
        s.push('\n');
        for &m in &self.plan.methods {
            let _ = write!(s, "| {} |", m.label());
            for &st in &self.plan.settings {
                match self.cell(st, m) {
                    Some(c) if c.runs > c.failures => {
                        let _ = write!(s, " {:.2} ({:.2}, {:.2})", c.median, c.p025, c.p975);
                        if c.failures > 0 {
                            let _ = write!(s, " [{} failed]", c.failures);
                        }
                        s.push_str(" |");
                    }
                    _ => s.push_str(" n/a |"),
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn write_cells_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["setting", "method", "median", "p025", "p975", "runs", "failures"])?;
        for c in &self.cells {
            w.write_record([
                c.setting.name().to_string(),
                c.method.name().to_string(),
                c.median.to_string(),
                c.p025.to_string(),
                c.p975.to_string(),
                c.runs.to_string(),
                c.failures.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }

    pub fn write_runs_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["setting", "method", "replicate", "ari", "k", "error"])?;
        for r in &self.runs {
            w.write_record([
                r.setting.name().to_string(),
                r.method.name().to_string(),
                (r.replicate + 1).to_string(),
                r.ari.map(|a| a.to_string()).unwrap_or_default(),
                r.k.map(|k| k.to_string()).unwrap_or_default(),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }
}

/// Fits every method on every replicate of every setting and summarizes
/// the ARI against the true labels. Comparators receive the configured
/// cluster count; HyDaP chooses its own. Replicate datasets are the ones
/// `simulate` writes for the same seed.
pub fn run_benchmark(plan: &BenchPlan, cfg: &Config) -> Result<BenchTable> {
    if plan.replicates == 0 {
        return Err(Error::Usage("benchmark needs at least one replicate".into()));
    }
    let data: Vec<_> = plan
        .settings
        .par_iter()
        .flat_map_iter(|&st| (0..plan.replicates).map(move |r| (st, r)))
        .map(|(st, r)| replicate(st, plan.seed, r, plan.rho))
        .collect::<Result<_>>()?;
    let reps = plan.replicates;
    let tasks: Vec<(usize, usize, usize)> = (0..plan.settings.len())
        .flat_map(|s| (0..plan.methods.len()).flat_map(move |m| (0..reps).map(move |r| (s, m, r))))
        .collect();
    let k = cfg.benchmark.comparator_k;
    let runs: Vec<BenchRun> = tasks
        .par_iter()
        .map(|&(s, m, r)| {
            let ld = &data[s * reps + r];
            let method = plan.methods[m];
            let seed = rng::derive_seed(replicate_seed(plan.seed, r), 100 + method.index());
            let mut run = BenchRun {
                setting: plan.settings[s],
                method,
                replicate: r,
                ari: None,
                k: None,
                error: None,
                hydap: None,
            };
            match fit(&ld.dataset, method, Some(k), cfg, seed) {
                Ok(f) => {
                    run.ari = Some(ari(&f.assign, &ld.truth).expect("equal lengths"));
                    run.k = Some(f.k);
                    if let FitDetail::Hydap(h) = f.detail {
                        run.hydap = Some(h);
                    }
                }
                Err(e) => run.error = Some(e.to_string()),
            }
            run
        })
        .collect();

    let mut cells = Vec::new();
    for &st in &plan.settings {
        for &m in &plan.methods {
            let group: Vec<&BenchRun> = runs.iter().filter(|r| r.setting == st && r.method == m).collect();
            let aris: Vec<f64> = group.iter().filter_map(|r| r.ari).collect();
            cells.push(BenchCell {
                setting: st,
                method: m,
                median: median(&aris),
                p025: percentile(&aris, 0.025),
                p975: percentile(&aris, 0.975),
                runs: group.len(),
                failures: group.len() - aris.len(),
            });
        }
    }
    Ok(BenchTable {
        plan: plan.clone(),
        cells,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> Config {
        let mut c = Config::default();
        c.pipeline.bcss_screen = false;
        c.pipeline.permutations = 10;
        c.pipeline.consensus.h_iters = 40;
        c
    }

    #[test]
    fn single_replicate_percentiles_equal_the_median() {
        let plan = BenchPlan {
            settings: vec![SimSetting::Sim2a],
            methods: vec![Algorithm::PamGower, Algorithm::Kproto],
            replicates: 1,
            seed: 3,
            rho: None,
        };
        let t = run_benchmark(&plan, &quick()).unwrap();
        assert_eq!(t.cells.len(), 2);
        for c in &t.cells {
            assert_eq!((c.p025, c.p975), (c.median, c.median));
        }
        // Gower drowns the continuous signal in categorical noise
        assert!(t.cell(SimSetting::Sim2a, Algorithm::PamGower).unwrap().median <= 0.10);
    }

    #[test]
    fn comparators_need_k() {
        let ld = replicate(SimSetting::Sim1a, 1, 0, None).unwrap();
        assert!(matches!(
            fit(&ld.dataset, Algorithm::PamGower, None, &quick(), 1),
            Err(Error::Usage(_))
        ));
        let f = fit(&ld.dataset, Algorithm::PamGower, Some(3), &quick(), 1).unwrap();
        let direct = pam(&pairwise_matrix(&ld.dataset, Measure::Gower).unwrap(), 3).unwrap();
        assert_eq!(f.assign, direct.assign);
    }

    #[test]
    fn markdown_shape() {
        let plan = BenchPlan {
            settings: vec![SimSetting::Sim1a, SimSetting::Sim3],
            methods: vec![Algorithm::PamFamd],
            replicates: 2,
            seed: 5,
            rho: None,
        };
        let md = run_benchmark(&plan, &quick()).unwrap().to_markdown();
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "| Method | sim1a | sim3 |");
        assert!(lines[2].starts_with("| PAM + FAMD distance | "));
    }
}
