//! Surrogate losses used to tune averaging weights.
//!
//! Every loss is the row mean of a per-row penalty `V(y_i, ŷ_i)`:
//!
//! * `SquaredError`: `(ŷ − y)²` on single-column blocks; on probability blocks the
//!   squared distance to the one-hot label (the Brier score).
//! * `CrossEntropy`: `−log p_{y}` with the probability clamped to `[1e-12, 1]`.
//! * `Hinge`: `max(0, 1 − y·m)` on margin blocks with `y ∈ {−1, +1}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::{PredictionBlock, Targets, TaskKind};
use crate::error::{PearlError, Result};

/// Lower clamp applied to probabilities before taking logarithms.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurrogateLoss {
    SquaredError,
    CrossEntropy,
    Hinge,
}

impl std::fmt::Display for SurrogateLoss {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SurrogateLoss::SquaredError => "squared_error",
            SurrogateLoss::CrossEntropy => "cross_entropy",
            SurrogateLoss::Hinge => "hinge",
        };
        f.write_str(s)
    }
}

/// Truth in the form a given loss consumes.
enum Truth<'a> {
    Real(&'a [f64]),
    Class(&'a [usize]),
    Signs(Vec<f64>),
}

fn hinge_signs(truth: &Targets) -> Result<Vec<f64>> {
    match truth {
        Targets::Real(y) => {
            if let Some(i) = y.iter().position(|&v| v != 1.0 && v != -1.0) {
                return Err(PearlError::InvalidLabel(format!(
                    "hinge needs labels in {{-1, +1}}, row {i} has {}",
                    y[i]
                )));
            }
            Ok(y.clone())
        }
        Targets::Class { labels, n_classes: 2 } => {
            Ok(labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect())
        }
        Targets::Class { n_classes, .. } => Err(PearlError::InvalidLabel(format!(
            "hinge needs a binary task, got {n_classes} classes"
        ))),
    }
}

impl SurrogateLoss {
    /// Kind of prediction block this loss consumes for the given truth.
    pub fn block_kind(&self, truth: &Targets) -> TaskKind {
        match (self, truth) {
            (SurrogateLoss::Hinge, _) => TaskKind::Margin,
            (_, Targets::Real(_)) => TaskKind::Regression,
            (_, Targets::Class { .. }) => TaskKind::Classification,
        }
    }

    fn check<'a>(&self, truth: &'a Targets, pred: &PredictionBlock) -> Result<Truth<'a>> {
        if truth.len() != pred.nrows() {
            return Err(PearlError::Shape(format!(
                "{} truth rows but {} prediction rows",
                truth.len(),
                pred.nrows()
            )));
        }
        match (self, truth, pred.kind()) {
            (SurrogateLoss::SquaredError, Targets::Real(y), TaskKind::Regression | TaskKind::Margin) => {
                Ok(Truth::Real(y))
            }
            (
                SurrogateLoss::SquaredError | SurrogateLoss::CrossEntropy,
                Targets::Class { labels, n_classes },
                TaskKind::Classification,
            ) => {
                if pred.ncols() != *n_classes {
                    return Err(PearlError::Shape(format!(
                        "{} probability columns for {} classes",
                        pred.ncols(),
                        n_classes
                    )));
                }
                Ok(Truth::Class(labels))
            }
            (SurrogateLoss::CrossEntropy, Targets::Real(_), _) => Err(PearlError::InvalidArgument(
                "cross entropy needs class targets, got regression targets".into(),
            )),
            (SurrogateLoss::Hinge, _, TaskKind::Margin) => Ok(Truth::Signs(hinge_signs(truth)?)),
            (loss, _, kind) => Err(PearlError::InvalidArgument(format!(
                "{loss} cannot score a {kind:?} block against these targets"
            ))),
        }
    }

    /// Mean loss over rows.
    pub fn value(&self, truth: &Targets, pred: &PredictionBlock) -> Result<f64> {
        let t = self.check(truth, pred)?;
        let n = pred.nrows() as f64;
        let v = pred.values();
        let total: f64 = match (self, t) {
            (SurrogateLoss::SquaredError, Truth::Real(y)) => {
                y.iter().zip(pred.column()).map(|(y, p)| (p - y).powi(2)).sum()
            }
            (SurrogateLoss::SquaredError, Truth::Class(labels)) => labels
                .iter()
                .enumerate()
                .map(|(i, &l)| {
                    (0..v.ncols())
                        .map(|c| {
                            let target = if c == l { 1.0 } else { 0.0 };
                            (v[(i, c)] - target).powi(2)
                        })
                        .sum::<f64>()
                })
                .sum(),
            (SurrogateLoss::CrossEntropy, Truth::Class(labels)) => labels
                .iter()
                .enumerate()
                .map(|(i, &l)| -v[(i, l)].clamp(PROB_FLOOR, 1.0).ln())
                .sum(),
            (SurrogateLoss::Hinge, Truth::Signs(y)) => y
                .iter()
                .zip(pred.column())
                .map(|(y, m)| (1.0 - y * m).max(0.0))
                .sum(),
            _ => unreachable!("checked above"),
        };
        Ok(total / n)
    }

    /// Gradient of the mean loss with respect to every prediction entry.
    pub fn gradient(&self, truth: &Targets, pred: &PredictionBlock) -> Result<DMatrix<f64>> {
        let t = self.check(truth, pred)?;
        let n = pred.nrows() as f64;
        let v = pred.values();
        let mut g = DMatrix::zeros(v.nrows(), v.ncols());
        match (self, t) {
            (SurrogateLoss::SquaredError, Truth::Real(y)) => {
                for (i, (y, p)) in y.iter().zip(pred.column()).enumerate() {
                    g[(i, 0)] = 2.0 * (p - y) / n;
                }
            }
            (SurrogateLoss::SquaredError, Truth::Class(labels)) => {
                for (i, &l) in labels.iter().enumerate() {
                    for c in 0..v.ncols() {
                        let target = if c == l { 1.0 } else { 0.0 };
                        g[(i, c)] = 2.0 * (v[(i, c)] - target) / n;
                    }
                }
            }
            (SurrogateLoss::CrossEntropy, Truth::Class(labels)) => {
                for (i, &l) in labels.iter().enumerate() {
                    let p = v[(i, l)];
                    if (PROB_FLOOR..=1.0).contains(&p) {
                        g[(i, l)] = -1.0 / (n * p);
                    }
                }
            }
            (SurrogateLoss::Hinge, Truth::Signs(y)) => {
                for (i, (y, m)) in y.iter().zip(pred.column()).enumerate() {
                    if 1.0 - y * m > 0.0 {
                        g[(i, 0)] = -y / n;
                    }
                }
            }
            _ => unreachable!("checked above"),
        }
        Ok(g)
    }
}
