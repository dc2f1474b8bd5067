//! The five simulation settings (three clusters of 40, 40 and 120 subjects),
//! optionally with exchangeable within-cluster correlation among the
//! continuous variables.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{MixedDataset, VariableMeta};
use crate::error::{Error, Result};
use crate::math::{beta_quantile, normal_cdf};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimSetting {
    Sim1a,
    Sim1b,
    Sim2a,
    Sim2b,
    Sim3,
}

impl SimSetting {
    pub const ALL: [SimSetting; 5] = [
        SimSetting::Sim1a,
        SimSetting::Sim1b,
        SimSetting::Sim2a,
        SimSetting::Sim2b,
        SimSetting::Sim3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SimSetting::Sim1a => "sim1a",
            SimSetting::Sim1b => "sim1b",
            SimSetting::Sim2a => "sim2a",
            SimSetting::Sim2b => "sim2b",
            SimSetting::Sim3 => "sim3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name().eq_ignore_ascii_case(s))
    }
}

/// Distribution of one variable within one cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Margin {
    /// Mean and standard deviation.
    Normal(f64, f64),
    /// Beta(a, b) shifted by a constant.
    Beta(f64, f64, f64),
    /// Probabilities of levels L1, L2, L3.
    Multinomial([f64; 3]),
}

impl Margin {
    fn is_categorical(self) -> bool {
        matches!(self, Margin::Multinomial(_))
    }

    // Continuous value for a standard-normal copula coordinate.
    fn from_normal(self, z: f64) -> f64 {
        match self {
            Margin::Normal(m, s) => m + s * z,
            Margin::Beta(a, b, shift) => {
                let u = normal_cdf(z).clamp(1e-300, 1.0 - 1e-16);
                beta_quantile(a, b, u) + shift
            }
            Margin::Multinomial(_) => unreachable!("categorical margin"),
        }
    }
}

/// A variable of a setting: per-cluster margins and whether it drives the
/// clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct SimVariable {
    pub name: String,
    pub margins: [Margin; 3],
    pub informative: bool,
}

fn var(i: usize, informative: bool, margins: [Margin; 3]) -> SimVariable {
    SimVariable {
        name: format!("x{i}"),
        margins,
        informative,
    }
}

fn same(m: Margin) -> [Margin; 3] {
    [m, m, m]
}

use Margin::{Beta, Multinomial as M, Normal as N};

const NOISE_M: [Margin; 3] = [
    M([0.3, 0.3, 0.4]),
    M([0.4, 0.3, 0.3]),
    M([0.3, 0.4, 0.3]),
];

/// Variable table of a setting.
pub fn variables(setting: SimSetting) -> Vec<SimVariable> {
    let first_three = || {
        vec![
            var(1, true, [N(-2.0, 2.0), N(2.0, 2.0), N(6.0, 2.0)]),
            var(2, true, [N(20.0, 1.0), N(25.0, 1.0), N(18.0, 1.0)]),
            var(3, true, [N(0.0, 1.0), N(-7.0, 1.0), N(4.0, 1.0)]),
            var(4, false, same(N(0.0, 1.0))),
        ]
    };
    match setting {
        SimSetting::Sim1a => {
            let mut v = first_three();
            v.push(var(
                5,
                true,
                [M([0.1, 0.1, 0.8]), M([0.1, 0.8, 0.1]), M([0.8, 0.1, 0.1])],
            ));
            v
        }
        SimSetting::Sim2a => {
            let mut v = first_three();
            v.push(var(
                5,
                false,
                [M([0.3, 0.3, 0.4]), M([0.3, 0.3, 0.4]), M([0.4, 0.3, 0.3])],
            ));
            v
        }
        SimSetting::Sim1b => vec![
            var(1, true, [N(-2.0, 2.0), N(-1.0, 2.0), N(0.0, 2.0)]),
            var(2, true, [N(20.0, 1.0), N(24.0, 1.0), N(21.0, 1.0)]),
            var(3, true, [N(5.0, 1.0), N(8.0, 1.0), N(7.0, 1.0)]),
            var(4, false, same(N(0.0, 1.0))),
            var(5, false, same(N(40.0, 1.0))),
            var(6, true, [N(-1.0, 1.0), N(1.0, 1.0), N(-2.0, 1.0)]),
            var(7, true, [N(0.0, 1.0), N(-1.0, 1.0), N(2.0, 1.0)]),
            var(8, true, [N(2.0, 1.0), N(1.0, 1.0), N(0.0, 1.0)]),
            var(9, false, same(N(0.0, 1.0))),
            var(10, false, same(N(0.0, 1.0))),
            var(11, false, same(N(0.0, 1.0))),
            var(12, false, NOISE_M),
            var(
                13,
                true,
                [M([0.9, 0.05, 0.05]), M([0.05, 0.9, 0.05]), M([0.05, 0.05, 0.9])],
            ),
            var(
                14,
                true,
                [M([0.05, 0.05, 0.9]), M([0.05, 0.9, 0.05]), M([0.9, 0.05, 0.05])],
            ),
        ],
        SimSetting::Sim2b => vec![
            var(
                1,
                true,
                [Beta(0.1, 5.0, 0.0), Beta(0.1, 5.0, 0.3), Beta(0.1, 5.0, 0.5)],
            ),
            var(
                2,
                true,
                [Beta(0.2, 5.0, 0.0), Beta(0.1, 5.0, 0.3), Beta(0.1, 5.0, 0.5)],
            ),
            var(
                3,
                true,
                [Beta(0.2, 3.0, 0.0), Beta(0.2, 3.0, 0.3), Beta(0.2, 3.0, 0.5)],
            ),
            var(
                4,
                true,
                [Beta(0.1, 3.0, 0.0), Beta(0.1, 3.0, 0.3), Beta(0.2, 3.0, 0.5)],
            ),
            var(5, false, same(N(0.0, 0.01))),
            var(6, false, NOISE_M),
            var(7, false, same(M([0.3, 0.3, 0.4]))),
            var(8, false, same(M([0.3, 0.3, 0.4]))),
        ],
        SimSetting::Sim3 => vec![
            var(1, false, same(N(0.0, 0.5))),
            var(2, false, same(N(-3.0, 1.0))),
            var(3, false, same(N(4.0, 2.0))),
            var(4, false, same(N(0.0, 1.0))),
            var(
                5,
                true,
                [M([0.05, 0.05, 0.9]), M([0.05, 0.9, 0.05]), M([0.9, 0.05, 0.05])],
            ),
            var(6, false, NOISE_M),
            var(
                7,
                true,
                [M([0.9, 0.05, 0.05]), M([0.05, 0.9, 0.05]), M([0.05, 0.05, 0.9])],
            ),
        ],
    }
}

pub const DEFAULT_RHO: f64 = 0.4;
pub const LEVELS: [&str; 3] = ["L1", "L2", "L3"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub setting: SimSetting,
    pub sizes: [usize; 3],
    pub correlated: bool,
    /// Within-cluster copula correlation, used when `correlated`.
    pub rho: f64,
    pub seed: u64,
}

impl SimSpec {
    pub fn new(setting: SimSetting, seed: u64) -> Self {
        Self {
            setting,
            sizes: [40, 40, 120],
            correlated: false,
            rho: DEFAULT_RHO,
            seed,
        }
    }

    pub fn correlated(mut self, rho: f64) -> Self {
        self.correlated = true;
        self.rho = rho;
        self
    }

    pub fn effective_rho(&self) -> f64 {
        if self.correlated {
            self.rho
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub dataset: MixedDataset,
    pub truth: Vec<usize>,
    pub informative: Vec<String>,
}

/// Draws a dataset; with `correlated` set, delegates to
/// [`generate_correlated`].
pub fn generate(spec: &SimSpec) -> Result<LabeledDataset> {
    generate_correlated(spec)
}

/// Continuous variables come from a Gaussian copula with exchangeable
/// correlation `rho` within each cluster (rho = 0 gives independent draws;
/// the random stream is the same either way).
pub fn generate_correlated(spec: &SimSpec) -> Result<LabeledDataset> {
    let rho = spec.effective_rho();
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidRho(rho));
    }
    let vars = variables(spec.setting);
    let n: usize = spec.sizes.iter().sum();
    let mut g = rng::seeded(spec.seed);
    let (a, b) = (libm::sqrt(rho), libm::sqrt(1.0 - rho));
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(n); vars.len()];
    let mut truth = Vec::with_capacity(n);
    for (c, &size) in spec.sizes.iter().enumerate() {
        for _ in 0..size {
            truth.push(c);
            let shared: f64 = StandardNormal.sample(&mut g);
            for (v, col) in vars.iter().zip(columns.iter_mut()) {
                let value = match v.margins[c] {
                    Margin::Multinomial(p) => {
                        let u: f64 = g.random();
                        if u < p[0] {
                            0.0
                        } else if u < p[0] + p[1] {
                            1.0
                        } else {
                            2.0
                        }
                    }
                    m => {
                        let e: f64 = StandardNormal.sample(&mut g);
                        m.from_normal(a * shared + b * e)
                    }
                };
                col.push(value);
            }
        }
    }
    let mut meta = Vec::new();
    let mut continuous = Vec::new();
    let mut categorical = Vec::new();
    for (v, col) in vars.iter().zip(columns) {
        if v.margins[0].is_categorical() {
            meta.push(VariableMeta::categorical(v.name.clone(), &LEVELS));
            categorical.push(col.into_iter().map(|x| x as u32).collect());
        } else {
            meta.push(VariableMeta::continuous(v.name.clone()));
            continuous.push(col);
        }
    }
    Ok(LabeledDataset {
        dataset: MixedDataset::new(meta, continuous, categorical)?,
        truth,
        informative: vars
            .iter()
            .filter(|v| v.informative)
            .map(|v| v.name.to_string())
            .collect(),
    })
}
