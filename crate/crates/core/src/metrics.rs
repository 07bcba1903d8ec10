use serde::{Deserialize, Serialize};

use crate::data::{PredictionBlock, Targets, TaskKind};
use crate::error::{PearlError, Result};
use crate::loss::SurrogateLoss;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: f64,
    pub accuracy: Option<f64>,
    pub ce: Option<f64>,
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(row: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in row.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Test metrics for a prediction block.
///
/// For probability blocks `mse` is the Brier score (squared distance to the one-hot
/// label, averaged over rows). Margin blocks classify by sign, with `m >= 0` read as +1.
pub fn metric_suite(truth: &Targets, pred: &PredictionBlock) -> Result<Metrics> {
    if truth.len() != pred.nrows() {
        return Err(PearlError::Shape(format!(
            "{} truth rows but {} prediction rows",
            truth.len(),
            pred.nrows()
        )));
    }
    match pred.kind() {
        TaskKind::Regression => Ok(Metrics {
            mse: SurrogateLoss::SquaredError.value(truth, pred)?,
            accuracy: None,
            ce: None,
        }),
        TaskKind::Classification => {
            let Targets::Class { labels, .. } = truth else {
                return Err(PearlError::InvalidArgument(
                    "probability predictions need class targets".into(),
                ));
            };
            let mse = SurrogateLoss::SquaredError.value(truth, pred)?;
            let ce = SurrogateLoss::CrossEntropy.value(truth, pred)?;
            let hits = labels
                .iter()
                .enumerate()
                .filter(|(i, &l)| argmax(pred.values().row(*i).iter().copied()) == l)
                .count();
            Ok(Metrics {
                mse,
                accuracy: Some(hits as f64 / labels.len() as f64),
                ce: Some(ce),
            })
        }
        TaskKind::Margin => {
            let signs: Vec<f64> = match truth {
                Targets::Real(y) => y.clone(),
                Targets::Class { labels, .. } => {
                    labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect()
                }
            };
            let hits = signs
                .iter()
                .zip(pred.column())
                .filter(|(y, m)| (if **m >= 0.0 { 1.0 } else { -1.0 }) == **y)
                .count();
            let mse = signs
                .iter()
                .zip(pred.column())
                .map(|(y, m)| (m - y).powi(2))
                .sum::<f64>()
                / signs.len() as f64;
            Ok(Metrics {
                mse,
                accuracy: Some(hits as f64 / signs.len() as f64),
                ce: None,
            })
        }
    }
}

/// The task's original loss: MSE for regression, error rate for classification.
pub fn original_loss(truth: &Targets, pred: &PredictionBlock) -> Result<f64> {
    let m = metric_suite(truth, pred)?;
    Ok(match m.accuracy {
        Some(acc) => 1.0 - acc,
        None => m.mse,
    })
}
