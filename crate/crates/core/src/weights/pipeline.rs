//! End-to-end fit: representations, candidate predictors, cross-validated weights.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{cv_predictions, CvPlan, CvPredictionTable};
use super::simplex::WeightVector;
use super::solver::{minimize_on_simplex, solve_weights, SolveReport, SolverOptions};
use crate::candidates::CandidatePool;
use crate::data::{LabeledDataset, PredictionBlock, TaskKind};
use crate::downstream::{DownstreamConfig, FittedPredictor};
use crate::error::{PearlError, Result};
use crate::frl::{foundation_matrices, FittedFrl, FrlState};
use crate::loss::SurrogateLoss;

/// Learners, candidates, full-data candidate predictors and averaging weights.
#[derive(Debug, Clone)]
pub struct PearlModel {
    frls: Vec<FittedFrl>,
    pool: CandidatePool,
    predictors: Vec<FittedPredictor>,
    weights: WeightVector,
    loss: SurrogateLoss,
    output_kind: TaskKind,
}

impl PearlModel {
    pub fn new(
        frls: Vec<FittedFrl>,
        pool: CandidatePool,
        predictors: Vec<FittedPredictor>,
        weights: WeightVector,
        loss: SurrogateLoss,
        output_kind: TaskKind,
    ) -> Result<Self> {
        let dims: Vec<usize> = frls.iter().map(FittedFrl::output_dim).collect();
        if dims != pool.foundation_dims() {
            return Err(PearlError::Shape(format!(
                "learner widths {dims:?}, pool expects {:?}",
                pool.foundation_dims()
            )));
        }
        if predictors.len() != pool.len() || weights.len() != pool.len() {
            return Err(PearlError::Shape(format!(
                "{} candidates, {} predictors, {} weights",
                pool.len(),
                predictors.len(),
                weights.len()
            )));
        }
        if let Some(j) = (0..pool.len()).find(|&j| predictors[j].input_dim() != pool.candidate_dim(j)) {
            return Err(PearlError::Shape(format!("predictor {j} width mismatch")));
        }
        Ok(Self { frls, pool, predictors, weights, loss, output_kind })
    }

    pub fn frls(&self) -> &[FittedFrl] {
        &self.frls
    }

    pub fn pool(&self) -> &CandidatePool {
        &self.pool
    }

    pub fn predictors(&self) -> &[FittedPredictor] {
        &self.predictors
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn loss(&self) -> SurrogateLoss {
        self.loss
    }

    pub fn output_kind(&self) -> TaskKind {
        self.output_kind
    }

    /// `ĝ_j(ẑ_new,[j])` for every candidate.
    pub fn candidate_outputs(&self, features: &DMatrix<f64>) -> Result<Vec<PredictionBlock>> {
        let foundation = foundation_matrices(&self.frls, features)?;
        (0..self.pool.len())
            .into_par_iter()
            .map(|j| {
                let z = self.pool.realize(&foundation, j)?;
                self.predictors[j].predict_as(&z, self.output_kind)
            })
            .collect()
    }

    pub fn predict(&self, features: &DMatrix<f64>) -> Result<PredictionBlock> {
        self.predict_with(features, self.weights.as_slice())
    }

    /// Aggregate with caller-supplied weights instead of the fitted ones.
    pub fn predict_with(&self, features: &DMatrix<f64>, weights: &[f64]) -> Result<PredictionBlock> {
        PredictionBlock::weighted_sum(&self.candidate_outputs(features)?, weights)
    }

    pub fn to_json(&self) -> Result<String> {
        let saved = SavedModel {
            frls: self.frls.iter().map(FrlState::try_from).collect::<Result<_>>()?,
            pool: self.pool.clone(),
            predictors: self.predictors.clone(),
            weights: self.weights.clone(),
            loss: self.loss,
            output_kind: self.output_kind,
        };
        serde_json::to_string_pretty(&saved).map_err(|e| PearlError::Config(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let saved: SavedModel =
            serde_json::from_str(s).map_err(|e| PearlError::Config(format!("model file: {e}")))?;
        Self::new(
            saved.frls.into_iter().map(FittedFrl::from).collect(),
            saved.pool,
            saved.predictors,
            saved.weights,
            saved.loss,
            saved.output_kind,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct SavedModel {
    frls: Vec<FrlState>,
    pool: CandidatePool,
    predictors: Vec<FittedPredictor>,
    weights: WeightVector,
    loss: SurrogateLoss,
    output_kind: TaskKind,
}

/// Everything produced while fitting, kept for baselines and diagnostics.
#[derive(Debug, Clone)]
pub struct FittedPipeline {
    pub model: PearlModel,
    pub cv_table: CvPredictionTable,
    pub report: SolveReport,
    pub train_foundation: Vec<DMatrix<f64>>,
}

fn fit_candidates(
    dataset: &LabeledDataset,
    pool: &CandidatePool,
    foundation: &[DMatrix<f64>],
    downstream: &DownstreamConfig,
) -> Result<Vec<FittedPredictor>> {
    (0..pool.len())
        .into_par_iter()
        .map(|j| downstream.fit(&pool.realize(foundation, j)?, dataset.target()))
        .collect()
}

/// Fits downstream predictors, cross-validated weights, and full-data refits.
pub fn fit_pipeline(
    train: &LabeledDataset,
    frls: Vec<FittedFrl>,
    pool: CandidatePool,
    plan: &CvPlan,
    downstream: &DownstreamConfig,
    loss: SurrogateLoss,
    solver: &SolverOptions,
) -> Result<FittedPipeline> {
    let foundation = foundation_matrices(&frls, train.features())?;
    let table = cv_predictions(train, &pool, &foundation, plan, downstream, loss)?;
    let report = solve_weights(&table, loss, solver)?;
    let predictors = fit_candidates(train, &pool, &foundation, downstream)?;
    let kind = loss.block_kind(train.target());
    let model = PearlModel::new(frls, pool, predictors, report.weights.clone(), loss, kind)?;
    Ok(FittedPipeline { model, cv_table: table, report, train_foundation: foundation })
}

/// Fits on `train` and returns the model with its aggregated test predictions.
#[allow(clippy::too_many_arguments)]
pub fn pearl_fit_predict(
    train: &LabeledDataset,
    test_features: &DMatrix<f64>,
    frls: Vec<FittedFrl>,
    pool: CandidatePool,
    plan: &CvPlan,
    downstream: &DownstreamConfig,
    loss: SurrogateLoss,
    solver: &SolverOptions,
) -> Result<(PearlModel, PredictionBlock)> {
    let fitted = fit_pipeline(train, frls, pool, plan, downstream, loss, solver)?;
    let pred = fitted.model.predict(test_features)?;
    Ok((fitted.model, pred))
}

/// Weights tuned on in-sample fitted values of full-data fits (no cross-validation).
pub fn solve_weights_naive(
    dataset: &LabeledDataset,
    pool: &CandidatePool,
    foundation: &[DMatrix<f64>],
    downstream: &DownstreamConfig,
    loss: SurrogateLoss,
    solver: &SolverOptions,
) -> Result<SolveReport> {
    let kind = loss.block_kind(dataset.target());
    let predictors = fit_candidates(dataset, pool, foundation, downstream)?;
    let blocks = predictors
        .iter()
        .enumerate()
        .map(|(j, p)| p.predict_as(&pool.realize(foundation, j)?, kind))
        .collect::<Result<Vec<_>>>()?;
    minimize_on_simplex(&blocks, dataset.target(), loss, solver)
}
