use std::path::Path;

use anyhow::Context;
use cmc_sir::{DegreeDistribution, EpidemicConfig, TransmissionLaw};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TLawSpec {
    Point { t: f64 },
    Bernoulli { p: f64 },
    Atoms { atoms: Vec<(f64, f64)> },
    Beta { alpha: f64 },
    ExpPeriod { rate: f64 },
    ConstPeriod { duration: f64 },
}

impl TLawSpec {
    pub fn build(&self) -> cmc_sir::Result<TransmissionLaw> {
        match self {
            Self::Point { t } => TransmissionLaw::point(*t),
            Self::Bernoulli { p } => TransmissionLaw::bernoulli(*p),
            Self::Atoms { atoms } => TransmissionLaw::atoms(atoms.clone()),
            Self::Beta { alpha } => TransmissionLaw::beta(*alpha),
            Self::ExpPeriod { rate } => TransmissionLaw::exp_period(*rate),
            Self::ConstPeriod { duration } => TransmissionLaw::const_period(*duration),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedDistribution {
    pub name: String,
    pub degree_distribution: Vec<(u32, u32, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: Vec<f64>,
    /// Extra distributions to sweep; the top-level one is used when empty.
    #[serde(default)]
    pub distributions: Vec<NamedDistribution>,
}

/// 13 points, geometric on `[0.05, 50]`.
pub fn default_alpha_grid() -> Vec<f64> {
    let (lo, hi, k) = (0.05f64, 50.0f64, 13);
    (0..k)
        .map(|i| lo * (hi / lo).powf(i as f64 / (k - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub degree_distribution: Vec<(u32, u32, f64)>,
    #[serde(default)]
    pub t_law: Option<TLawSpec>,
    #[serde(default)]
    pub f_v: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_threshold")]
    pub outbreak_threshold_fraction: f64,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

fn default_n() -> usize {
    100_000
}

fn default_replicates() -> usize {
    100
}

fn default_threshold() -> f64 {
    0.05
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(Failure::Io)?;
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }

    pub fn distribution(&self) -> Result<DegreeDistribution, Failure> {
        Ok(DegreeDistribution::from_triples(&self.degree_distribution)?)
    }

    pub fn law(&self) -> Result<TransmissionLaw, Failure> {
        let spec = self
            .t_law
            .as_ref()
            .ok_or_else(|| Failure::Config("config has no t_law".into()))?;
        Ok(spec.build()?)
    }

    pub fn epidemic(&self) -> Result<EpidemicConfig, Failure> {
        let cfg = EpidemicConfig {
            f_v: self.f_v,
            outbreak_threshold_fraction: self.outbreak_threshold_fraction,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
