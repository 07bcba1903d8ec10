//! K-fold cross-validated candidate predictions.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::CandidatePool;
use crate::data::{select_rows, LabeledDataset, PredictionBlock, Targets};
use crate::downstream::DownstreamConfig;
use crate::error::{PearlError, Result};
use crate::loss::SurrogateLoss;
use crate::rng::seeded_rng;

/// Fold assignment shared by every candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    folds: usize,
    assignment: Vec<usize>,
    seed: u64,
}

/// A seeded random permutation of `0..n` cut into `k` contiguous chunks whose sizes
/// differ by at most one (the first `n mod k` chunks are the larger ones).
pub fn make_cv_plan(n: usize, k: usize, seed: u64) -> Result<CvPlan> {
    if k < 2 || k > n {
        return Err(PearlError::InvalidArgument(format!("fold count {k} outside 2..={n}")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seeded_rng(seed));
    let (base, extra) = (n / k, n % k);
    let mut assignment = vec![0; n];
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &i in &perm[pos..pos + size] {
            assignment[i] = fold;
        }
        pos += size;
    }
    Ok(CvPlan { folds: k, assignment, seed })
}

impl CvPlan {
    pub fn folds(&self) -> usize {
        self.folds
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Held-out rows of fold `k`, ascending.
    pub fn test_rows(&self, k: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.assignment[i] == k).collect()
    }

    /// Rows outside fold `k`, ascending.
    pub fn train_rows(&self, k: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.assignment[i] != k).collect()
    }
}

/// Out-of-fold predictions of every candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct CvPredictionTable {
    blocks: Vec<PredictionBlock>,
    truth: Targets,
    plan: CvPlan,
}

impl CvPredictionTable {
    pub fn new(blocks: Vec<PredictionBlock>, truth: Targets, plan: CvPlan) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| PearlError::InvalidArgument("no candidate blocks".into()))?;
        if let Some(j) = blocks.iter().position(|b| !b.same_layout(first)) {
            return Err(PearlError::Shape(format!("block {j} differs in kind or shape")));
        }
        if first.nrows() != truth.len() || plan.len() != truth.len() {
            return Err(PearlError::Shape("table rows, truth and plan disagree".into()));
        }
        Ok(Self { blocks, truth, plan })
    }

    pub fn blocks(&self) -> &[PredictionBlock] {
        &self.blocks
    }

    pub fn truth(&self) -> &Targets {
        &self.truth
    }

    pub fn plan(&self) -> &CvPlan {
        &self.plan
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// Refits each candidate's predictor without each fold and predicts the held-out rows.
///
/// Representations are computed once by the caller; only the downstream predictors
/// are refitted. The J × K fits run in parallel and are gathered in (j, k) order.
pub fn cv_predictions(
    dataset: &LabeledDataset,
    pool: &CandidatePool,
    foundation: &[DMatrix<f64>],
    plan: &CvPlan,
    downstream: &DownstreamConfig,
    loss: SurrogateLoss,
) -> Result<CvPredictionTable> {
    let n = dataset.nrows();
    if plan.len() != n {
        return Err(PearlError::Shape(format!("plan covers {} rows, dataset has {n}", plan.len())));
    }
    let truth = dataset.target();
    let kind = loss.block_kind(truth);
    let realized: Vec<DMatrix<f64>> =
        (0..pool.len()).map(|j| pool.realize(foundation, j)).collect::<Result<_>>()?;
    let folds: Vec<(Vec<usize>, Vec<usize>)> =
        (0..plan.folds()).map(|k| (plan.train_rows(k), plan.test_rows(k))).collect();

    let tasks: Vec<(usize, usize)> =
        (0..pool.len()).flat_map(|j| (0..plan.folds()).map(move |k| (j, k))).collect();
    let parts: Vec<PredictionBlock> = tasks
        .par_iter()
        .map(|&(j, k)| {
            let (train, test) = &folds[k];
            let z = &realized[j];
            downstream
                .fit(&select_rows(z, train), &truth.select(train))
                .and_then(|m| m.predict_as(&select_rows(z, test), kind))
                .map_err(|e| PearlError::Fold { candidate: j, fold: k, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;

    let mut blocks = Vec::with_capacity(pool.len());
    for j in 0..pool.len() {
        let first = &parts[j * plan.folds()];
        let mut full =
            PredictionBlock::from_parts_unchecked(DMatrix::zeros(n, first.ncols()), first.kind());
        for k in 0..plan.folds() {
            full.scatter_rows(&folds[k].1, &parts[j * plan.folds() + k]);
        }
        blocks.push(full);
    }
    CvPredictionTable::new(blocks, truth.clone(), plan.clone())
}
