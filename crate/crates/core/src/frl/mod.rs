//! Foundation representation learners: fitted on unlabeled rows, they map raw
//! feature rows to fixed-width representations.

mod eigen;
pub mod kernel;
pub mod kpca;
pub mod pca;

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use kernel::KernelSpec;
pub use kpca::{fit_kpca, KpcaModel};
pub use pca::{fit_pca, PcaModel};

use crate::data::UnlabeledDataset;
use crate::error::{PearlError, Result, Warning};

/// A fitted representation learner supplied from outside the crate.
pub trait RepresentationLearner: Send + Sync + Debug {
    fn name(&self) -> String;
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn transform(&self, rows: &DMatrix<f64>) -> Result<DMatrix<f64>>;
}

/// Fits a custom representation learner on unlabeled rows.
pub trait RepresentationFitter: Send + Sync {
    fn fit(&self, data: &UnlabeledDataset) -> Result<Arc<dyn RepresentationLearner>>;
}

#[derive(Debug, Clone)]
pub enum FrlKind {
    Pca(PcaModel),
    Kpca(KpcaModel),
    Identity { dim: usize },
    Custom(Arc<dyn RepresentationLearner>),
}

#[derive(Debug, Clone)]
pub struct FittedFrl {
    kind: FrlKind,
    warnings: Vec<Warning>,
}

impl FittedFrl {
    pub fn pca(data: &UnlabeledDataset, p: usize) -> Result<Self> {
        let (m, warnings) = fit_pca(data, p)?;
        Ok(Self { kind: FrlKind::Pca(m), warnings })
    }

    pub fn kpca(data: &UnlabeledDataset, kernel: KernelSpec, p: usize) -> Result<Self> {
        let (m, warnings) = fit_kpca(data, kernel, p)?;
        Ok(Self { kind: FrlKind::Kpca(m), warnings })
    }

    pub fn identity(dim: usize) -> Self {
        Self { kind: FrlKind::Identity { dim }, warnings: Vec::new() }
    }

    pub fn custom(learner: Arc<dyn RepresentationLearner>) -> Result<Self> {
        if learner.output_dim() == 0 {
            return Err(PearlError::InvalidArgument(format!(
                "custom learner {} has zero output width",
                learner.name()
            )));
        }
        Ok(Self { kind: FrlKind::Custom(learner), warnings: Vec::new() })
    }

    pub fn fit_custom(fitter: &dyn RepresentationFitter, data: &UnlabeledDataset) -> Result<Self> {
        Self::custom(fitter.fit(data)?)
    }

    pub fn kind(&self) -> &FrlKind {
        &self.kind
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn name(&self) -> String {
        match &self.kind {
            FrlKind::Pca(_) => "pca".into(),
            FrlKind::Kpca(m) => format!("kpca_{}", m.kernel().name()),
            FrlKind::Identity { .. } => "identity".into(),
            FrlKind::Custom(l) => l.name(),
        }
    }

    pub fn input_dim(&self) -> usize {
        match &self.kind {
            FrlKind::Pca(m) => m.input_dim(),
            FrlKind::Kpca(m) => m.input_dim(),
            FrlKind::Identity { dim } => *dim,
            FrlKind::Custom(l) => l.input_dim(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match &self.kind {
            FrlKind::Pca(m) => m.output_dim(),
            FrlKind::Kpca(m) => m.output_dim(),
            FrlKind::Identity { dim } => *dim,
            FrlKind::Custom(l) => l.output_dim(),
        }
    }

    pub fn transform(&self, rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let out = match &self.kind {
            FrlKind::Pca(m) => m.transform(rows)?,
            FrlKind::Kpca(m) => m.transform(rows)?,
            FrlKind::Identity { dim } => {
                if rows.ncols() != *dim {
                    return Err(PearlError::Shape(format!(
                        "identity expects {dim} columns, got {}",
                        rows.ncols()
                    )));
                }
                rows.clone()
            }
            FrlKind::Custom(l) => {
                if rows.ncols() != l.input_dim() {
                    return Err(PearlError::Shape(format!(
                        "{} expects {} columns, got {}",
                        l.name(),
                        l.input_dim(),
                        rows.ncols()
                    )));
                }
                l.transform(rows)?
            }
        };
        if out.shape() != (rows.nrows(), self.output_dim()) {
            return Err(PearlError::Shape(format!(
                "{} produced {:?}, expected {:?}",
                self.name(),
                out.shape(),
                (rows.nrows(), self.output_dim())
            )));
        }
        Ok(out)
    }
}

/// Serializable form of a fitted learner; custom learners have none.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrlState {
    Pca { model: PcaModel, warnings: Vec<Warning> },
    Kpca { model: KpcaModel, warnings: Vec<Warning> },
    Identity { dim: usize },
}

impl TryFrom<&FittedFrl> for FrlState {
    type Error = PearlError;

    fn try_from(f: &FittedFrl) -> Result<Self> {
        match &f.kind {
            FrlKind::Pca(m) => Ok(FrlState::Pca { model: m.clone(), warnings: f.warnings.clone() }),
            FrlKind::Kpca(m) => Ok(FrlState::Kpca { model: m.clone(), warnings: f.warnings.clone() }),
            FrlKind::Identity { dim } => Ok(FrlState::Identity { dim: *dim }),
            FrlKind::Custom(l) => Err(PearlError::InvalidArgument(format!(
                "custom learner {} cannot be saved",
                l.name()
            ))),
        }
    }
}

impl From<FrlState> for FittedFrl {
    fn from(s: FrlState) -> Self {
        match s {
            FrlState::Pca { model, warnings } => FittedFrl { kind: FrlKind::Pca(model), warnings },
            FrlState::Kpca { model, warnings } => FittedFrl { kind: FrlKind::Kpca(model), warnings },
            FrlState::Identity { dim } => FittedFrl::identity(dim),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrlMethod {
    Pca,
    Kpca,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelName {
    Linear,
    Gaussian,
    Polynomial,
    Sigmoid,
    Cosine,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelParams {
    pub gamma: Option<f64>,
    pub degree: Option<u32>,
    pub coef0: Option<f64>,
}

fn default_dim() -> usize {
    2
}

/// One entry of the `frls` list in an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrlConfig {
    pub method: FrlMethod,
    #[serde(default)]
    pub kernel: Option<KernelName>,
    #[serde(default)]
    pub params: KernelParams,
    #[serde(default = "default_dim")]
    pub p: usize,
}

impl FrlConfig {
    pub fn pca(p: usize) -> Self {
        Self { method: FrlMethod::Pca, kernel: None, params: KernelParams::default(), p }
    }

    pub fn kpca(kernel: KernelName, p: usize) -> Self {
        Self { method: FrlMethod::Kpca, kernel: Some(kernel), params: KernelParams::default(), p }
    }

    /// PCA plus Gaussian, polynomial, sigmoid and cosine KPCA, two components each.
    pub fn synthetic_defaults() -> Vec<Self> {
        vec![
            Self::pca(2),
            Self::kpca(KernelName::Gaussian, 2),
            Self::kpca(KernelName::Polynomial, 2),
            Self::kpca(KernelName::Sigmoid, 2),
            Self::kpca(KernelName::Cosine, 2),
        ]
    }

    /// Kernel with unspecified parameters filled from data-driven defaults.
    pub fn resolve_kernel(&self, data: &UnlabeledDataset) -> Result<KernelSpec> {
        let name = self
            .kernel
            .ok_or_else(|| PearlError::Config("kpca entry needs a kernel".into()))?;
        let d = data.ncols() as f64;
        let x = data.features();
        let mean = x.mean();
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64;
        let spec = match name {
            KernelName::Linear => KernelSpec::Linear,
            KernelName::Cosine => KernelSpec::Cosine,
            KernelName::Gaussian => KernelSpec::Gaussian {
                gamma: self
                    .params
                    .gamma
                    .unwrap_or(if var > 0.0 { 1.0 / (d * var) } else { 1.0 / d }),
            },
            KernelName::Polynomial => KernelSpec::Polynomial {
                degree: self.params.degree.unwrap_or(3),
                gamma: self.params.gamma.unwrap_or(1.0 / d),
                coef0: self.params.coef0.unwrap_or(1.0),
            },
            KernelName::Sigmoid => KernelSpec::Sigmoid {
                gamma: self.params.gamma.unwrap_or(1.0 / d),
                coef0: self.params.coef0.unwrap_or(0.0),
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn fit(&self, data: &UnlabeledDataset) -> Result<FittedFrl> {
        match self.method {
            FrlMethod::Pca => FittedFrl::pca(data, self.p),
            FrlMethod::Kpca => FittedFrl::kpca(data, self.resolve_kernel(data)?, self.p),
            FrlMethod::Identity => Ok(FittedFrl::identity(data.ncols())),
        }
    }
}

/// Fits every configured learner; distinct learners are fitted in parallel.
pub fn fit_frls(configs: &[FrlConfig], data: &UnlabeledDataset) -> Result<Vec<FittedFrl>> {
    configs.par_iter().map(|c| c.fit(data)).collect()
}

/// Applies each learner to the same rows.
pub fn foundation_matrices(frls: &[FittedFrl], rows: &DMatrix<f64>) -> Result<Vec<DMatrix<f64>>> {
    frls.par_iter().map(|f| f.transform(rows)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_input() {
        let x = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(FittedFrl::identity(3).transform(&x).unwrap(), x);
        assert!(FittedFrl::identity(2).transform(&x).is_err());
    }

    #[test]
    fn default_kernel_parameters() {
        let x = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 2.0, 0.0, 0.0, 2.0, 2.0, 2.0]);
        let data = UnlabeledDataset::new(x).unwrap();
        // all entries have variance 1
        assert_eq!(
            FrlConfig::kpca(KernelName::Gaussian, 2).resolve_kernel(&data).unwrap(),
            KernelSpec::Gaussian { gamma: 0.5 }
        );
        assert_eq!(
            FrlConfig::kpca(KernelName::Polynomial, 2).resolve_kernel(&data).unwrap(),
            KernelSpec::Polynomial { degree: 3, gamma: 0.5, coef0: 1.0 }
        );
        assert_eq!(
            FrlConfig::kpca(KernelName::Sigmoid, 2).resolve_kernel(&data).unwrap(),
            KernelSpec::Sigmoid { gamma: 0.5, coef0: 0.0 }
        );
    }

    #[test]
    fn config_parses_from_toml() {
        let c: FrlConfig = toml::from_str(
            "method = \"kpca\"\nkernel = \"polynomial\"\np = 3\n[params]\ndegree = 2\n",
        )
        .unwrap();
        assert_eq!(c.kernel, Some(KernelName::Polynomial));
        assert_eq!(c.params.degree, Some(2));
        assert_eq!(c.p, 3);
    }

    #[test]
    fn state_round_trip() {
        let x = DMatrix::from_row_slice(4, 2, &[0.0, 1.0, 2.0, 0.5, 0.3, 2.0, 2.0, 2.5]);
        let data = UnlabeledDataset::new(x.clone()).unwrap();
        let f = FittedFrl::kpca(&data, KernelSpec::Cosine, 2).unwrap();
        let json = serde_json::to_string(&FrlState::try_from(&f).unwrap()).unwrap();
        let back: FittedFrl = serde_json::from_str::<FrlState>(&json).unwrap().into();
        assert_eq!(back.transform(&x).unwrap(), f.transform(&x).unwrap());
    }
}
