//! Comparison methods built from the same fitted candidates.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::{PredictionBlock, Targets};
use crate::error::{PearlError, Result};
use crate::metrics::original_loss;
use crate::weights::{FittedPipeline, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BaselineKind {
    /// Single-learner candidate with the lowest test loss. Uses test labels.
    Best,
    /// The candidate concatenating every learner.
    Fusion,
    /// Equal weights over the single-learner candidates.
    SaFrl,
    /// Equal weights over all candidates.
    SaCand,
    /// Candidate with the lowest cross-validated surrogate objective.
    Ms,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 5] = [
        BaselineKind::Best,
        BaselineKind::Fusion,
        BaselineKind::SaFrl,
        BaselineKind::SaCand,
        BaselineKind::Ms,
    ];

    /// Name used in reports; the test-oracle baseline is labelled as such.
    pub fn method_name(&self) -> &'static str {
        match self {
            BaselineKind::Best => "best_oracle",
            BaselineKind::Fusion => "fusion",
            BaselineKind::SaFrl => "sa_frl",
            BaselineKind::SaCand => "sa_cand",
            BaselineKind::Ms => "ms",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOutput {
    pub kind: BaselineKind,
    pub prediction: PredictionBlock,
    pub weights: WeightVector,
    /// Selected candidate for the single-candidate baselines.
    pub chosen: Option<usize>,
    pub uses_test_labels: bool,
}

fn argmin(values: impl IntoIterator<Item = (usize, f64)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, v) in values {
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((j, v));
        }
    }
    best.map(|(j, _)| j)
}

/// Baseline prediction from precomputed test outputs of every candidate.
pub fn run_baseline_on_outputs(
    kind: BaselineKind,
    pipeline: &FittedPipeline,
    test_outputs: &[PredictionBlock],
    test_truth: Option<&Targets>,
) -> Result<BaselineOutput> {
    let pool = pipeline.model.pool();
    let j = pool.len();
    if test_outputs.len() != j {
        return Err(PearlError::Shape(format!("{} outputs for {j} candidates", test_outputs.len())));
    }
    let singles: Vec<usize> = pool.single_frl_candidates().into_iter().map(|(_, c)| c).collect();
    let (weights, chosen) = match kind {
        BaselineKind::Best => {
            let truth = test_truth.ok_or(PearlError::OracleNeedsLabels)?;
            let losses = singles
                .iter()
                .map(|&c| Ok((c, original_loss(truth, &test_outputs[c])?)))
                .collect::<Result<Vec<_>>>()?;
            let c = argmin(losses).ok_or_else(|| {
                PearlError::InvalidArgument("pool has no single-learner candidates".into())
            })?;
            (WeightVector::vertex(j, c), Some(c))
        }
        BaselineKind::Fusion => {
            let c = pool.fusion_index().ok_or_else(|| {
                PearlError::InvalidArgument("pool has no full-concatenation candidate".into())
            })?;
            (WeightVector::vertex(j, c), Some(c))
        }
        BaselineKind::SaFrl => {
            if singles.is_empty() {
                return Err(PearlError::InvalidArgument(
                    "pool has no single-learner candidates".into(),
                ));
            }
            let mut w = vec![0.0; j];
            for &c in &singles {
                w[c] = 1.0 / singles.len() as f64;
            }
            (WeightVector::new(w)?, None)
        }
        BaselineKind::SaCand => (WeightVector::uniform(j), None),
        BaselineKind::Ms => {
            let c = argmin(pipeline.report.vertex_objectives.iter().copied().enumerate())
                .expect("nonempty pool");
            (WeightVector::vertex(j, c), Some(c))
        }
    };
    let prediction = match chosen {
        Some(c) => test_outputs[c].clone(),
        None => PredictionBlock::weighted_sum(test_outputs, weights.as_slice())?,
    };
    Ok(BaselineOutput {
        kind,
        prediction,
        weights,
        chosen,
        uses_test_labels: kind == BaselineKind::Best,
    })
}

pub fn run_baseline(
    kind: BaselineKind,
    pipeline: &FittedPipeline,
    test_features: &DMatrix<f64>,
    test_truth: Option<&Targets>,
) -> Result<BaselineOutput> {
    let outputs = pipeline.model.candidate_outputs(test_features)?;
    run_baseline_on_outputs(kind, pipeline, &outputs, test_truth)
}
