//! Per-candidate predictors mapping candidate representations to targets.

pub mod ridge;
pub mod softmax;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use ridge::{fit_ridge, RidgeModel};
pub use softmax::{fit_softmax, SoftmaxModel, SoftmaxOptions};

use crate::data::{PredictionBlock, Targets, TaskKind};
use crate::error::{PearlError, Result, Warning};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DownstreamModel {
    Ridge,
    Softmax,
}

fn default_model() -> DownstreamModel {
    DownstreamModel::Ridge
}
fn default_lambda() -> f64 {
    1e-6
}
fn default_l2() -> f64 {
    1e-4
}
fn default_max_iter() -> usize {
    5000
}
fn default_tol() -> f64 {
    1e-6
}

/// The `[downstream]` config section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DownstreamConfig {
    #[serde(default = "default_model")]
    pub model: DownstreamModel,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_l2")]
    pub l2: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl Default for DownstreamConfig {
    fn default() -> Self {
        Self {
            model: default_model(),
            lambda: default_lambda(),
            l2: default_l2(),
            max_iter: default_max_iter(),
            tol: default_tol(),
        }
    }
}

impl DownstreamConfig {
    pub fn ridge(lambda: f64) -> Self {
        Self { model: DownstreamModel::Ridge, lambda, ..Default::default() }
    }

    pub fn softmax(l2: f64) -> Self {
        Self { model: DownstreamModel::Softmax, l2, ..Default::default() }
    }

    pub fn softmax_options(&self) -> SoftmaxOptions {
        SoftmaxOptions { l2: self.l2, max_iter: self.max_iter, tol: self.tol }
    }

    pub fn fit(&self, z: &DMatrix<f64>, target: &Targets) -> Result<FittedPredictor> {
        match (self.model, target) {
            (DownstreamModel::Ridge, Targets::Real(y)) => {
                Ok(FittedPredictor::Ridge(fit_ridge(z, y, self.lambda)?))
            }
            (DownstreamModel::Softmax, Targets::Class { labels, n_classes }) => Ok(
                FittedPredictor::Softmax(fit_softmax(z, labels, *n_classes, &self.softmax_options())?),
            ),
            (DownstreamModel::Ridge, _) => {
                Err(PearlError::InvalidArgument("ridge needs real-valued targets".into()))
            }
            (DownstreamModel::Softmax, _) => {
                Err(PearlError::InvalidArgument("softmax needs class targets".into()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FittedPredictor {
    Ridge(RidgeModel),
    Softmax(SoftmaxModel),
}

impl FittedPredictor {
    pub fn input_dim(&self) -> usize {
        match self {
            FittedPredictor::Ridge(m) => m.input_dim(),
            FittedPredictor::Softmax(m) => m.input_dim(),
        }
    }

    pub fn warnings(&self) -> &[Warning] {
        match self {
            FittedPredictor::Ridge(m) => m.warnings(),
            FittedPredictor::Softmax(m) => m.warnings(),
        }
    }

    /// Natural output: real values for ridge, class probabilities for softmax.
    pub fn predict(&self, z: &DMatrix<f64>) -> Result<PredictionBlock> {
        match self {
            FittedPredictor::Ridge(m) => PredictionBlock::regression(m.predict(z)?),
            FittedPredictor::Softmax(m) => PredictionBlock::probabilities(m.predict_proba(z)?),
        }
    }

    /// Output in the block kind a surrogate loss consumes.
    pub fn predict_as(&self, z: &DMatrix<f64>, kind: TaskKind) -> Result<PredictionBlock> {
        match (self, kind) {
            (FittedPredictor::Ridge(m), TaskKind::Margin) => PredictionBlock::margins(m.predict(z)?),
            (FittedPredictor::Softmax(m), TaskKind::Margin) => {
                PredictionBlock::margins(m.predict_margins(z)?)
            }
            (FittedPredictor::Ridge(_), TaskKind::Regression)
            | (FittedPredictor::Softmax(_), TaskKind::Classification) => self.predict(z),
            (_, kind) => Err(PearlError::InvalidArgument(format!(
                "predictor cannot produce a {kind:?} block"
            ))),
        }
    }
}
