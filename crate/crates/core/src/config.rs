//! Experiment configuration file (TOML).
//!
//! ```toml
//! seed = 42
//!
//! [[frls]]
//! method = "pca"          # pca | kpca | identity
//! p = 2
//!
//! [[frls]]
//! method = "kpca"
//! kernel = "gaussian"     # linear | gaussian | polynomial | sigmoid | cosine
//! p = 2
//! params = { gamma = 0.5 } # optional: gamma, degree, coef0
//!
//! [candidates]
//! scheme = "explicit"     # frl_subsets | fusion_columns | explicit
//! explicit = [{ name = "pca", frls = [0] }, { name = "pca+gaussian", frls = [0, 1] }]
//!
//! [downstream]
//! model = "ridge"         # ridge | softmax
//! lambda = 1e-6
//! l2 = 1e-4
//! max_iter = 5000
//! tol = 1e-6
//!
//! [cv]
//! folds = 5
//!
//! [solver]
//! loss = "squared_error"  # squared_error | cross_entropy | hinge
//! max_iter = 10000
//! tol = 1e-9
//!
//! [synthetic]
//! sigmas = [0.1, 0.5, 0.9, 1.5]
//! ns = [100, 200, 400, 800]
//! n_unlabeled = 2000
//! n_test = 1000
//! reps = 20
//! coef_policy = "per_rep"  # per_rep | fixed
//!
//! [consistency]
//! sigma = 0.5
//! ns = [50, 200, 1000, 2000]
//! reps = 10
//! include_oracle = true
//! ```
//!
//! Every section and key is optional; omitted values take the defaults shown.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::candidates::{enumerate_frl_subsets, CandidatePool, CandidateSpec};
use crate::downstream::{DownstreamConfig, DownstreamModel};
use crate::error::{PearlError, Result};
use crate::frl::FrlConfig;
use crate::loss::SurrogateLoss;
use crate::weights::SolverOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateScheme {
    #[default]
    FrlSubsets,
    FusionColumns,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSet {
    pub name: String,
    pub frls: Vec<usize>,
}

/// The `[candidates]` section. Explicit sets are appended after the generated ones
/// (or used alone under the `explicit` scheme); a set repeating a generated one is rejected.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateConfig {
    #[serde(default)]
    pub scheme: CandidateScheme,
    #[serde(default)]
    pub explicit: Vec<ExplicitSet>,
}

impl CandidateConfig {
    pub fn build_pool(&self, dims: Vec<usize>) -> Result<CandidatePool> {
        let mut specs = match self.scheme {
            CandidateScheme::FrlSubsets => enumerate_frl_subsets(dims.len())?,
            CandidateScheme::FusionColumns => crate::candidates::enumerate_fusion_columns(&dims)?,
            CandidateScheme::Explicit => Vec::new(),
        };
        specs.extend(self.explicit.iter().map(|e| CandidateSpec::Explicit {
            name: e.name.clone(),
            frls: e.frls.clone(),
        }));
        CandidatePool::new(specs, dims)
    }
}

fn default_folds() -> usize {
    5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvConfig {
    #[serde(default = "default_folds")]
    pub folds: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { folds: default_folds() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Defaults to squared error for ridge and cross entropy for softmax.
    #[serde(default)]
    pub loss: Option<SurrogateLoss>,
    #[serde(flatten)]
    pub options: SolverOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefPolicy {
    /// Fresh coefficients for every repetition.
    #[default]
    PerRep,
    /// One coefficient draw shared by all repetitions.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticGrid {
    pub sigmas: Vec<f64>,
    pub ns: Vec<usize>,
    pub n_unlabeled: usize,
    pub n_test: usize,
    pub reps: usize,
    pub coef_policy: CoefPolicy,
}

impl Default for SyntheticGrid {
    fn default() -> Self {
        Self {
            sigmas: vec![0.1, 0.5, 0.9, 1.5],
            ns: vec![100, 200, 400, 800],
            n_unlabeled: 2000,
            n_test: 1000,
            reps: 20,
            coef_policy: CoefPolicy::PerRep,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConsistencySettings {
    pub sigma: f64,
    pub ns: Vec<usize>,
    pub reps: usize,
    pub include_oracle: bool,
}

impl Default for ConsistencySettings {
    fn default() -> Self {
        Self { sigma: 0.5, ns: vec![50, 200, 1000, 2000], reps: 10, include_oracle: true }
    }
}

fn default_seed() -> u64 {
    20_240_601
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "FrlConfig::synthetic_defaults")]
    pub frls: Vec<FrlConfig>,
    #[serde(default)]
    pub candidates: CandidateConfig,
    #[serde(default)]
    pub downstream: DownstreamConfig,
    #[serde(default)]
    pub cv: CvConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub synthetic: SyntheticGrid,
    #[serde(default)]
    pub consistency: ConsistencySettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            frls: FrlConfig::synthetic_defaults(),
            candidates: CandidateConfig::default(),
            downstream: DownstreamConfig::default(),
            cv: CvConfig::default(),
            solver: SolverConfig::default(),
            synthetic: SyntheticGrid::default(),
            consistency: ConsistencySettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| PearlError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn loss(&self) -> SurrogateLoss {
        self.solver.loss.unwrap_or(match self.downstream.model {
            DownstreamModel::Ridge => SurrogateLoss::SquaredError,
            DownstreamModel::Softmax => SurrogateLoss::CrossEntropy,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PearlError::Config(m));
        if self.frls.is_empty() {
            return bad("at least one learner is required".into());
        }
        if self.cv.folds < 2 {
            return bad(format!("cv.folds must be >= 2, got {}", self.cv.folds));
        }
        let g = &self.synthetic;
        if g.sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return bad("synthetic.sigmas must be finite and >= 0".into());
        }
        if g.ns.contains(&0) || g.n_unlabeled < 2 || g.n_test == 0 || g.reps == 0 {
            return bad("synthetic sizes must be >= 1 (n_unlabeled >= 2)".into());
        }
        let c = &self.consistency;
        if !(c.sigma >= 0.0 && c.sigma.is_finite()) || c.reps == 0 || c.ns.contains(&0) {
            return bad("consistency needs sigma >= 0, reps >= 1 and positive ns".into());
        }
        Ok(())
    }
}
