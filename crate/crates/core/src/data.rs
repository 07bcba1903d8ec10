//! Datasets and prediction blocks.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{PearlError, Result};

/// Regression targets or class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Targets {
    Real(Vec<f64>),
    Class { labels: Vec<usize>, n_classes: usize },
}

impl Targets {
    pub fn classes(labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if n_classes < 2 {
            return Err(PearlError::InvalidArgument(format!(
                "class count must be at least 2, got {n_classes}"
            )));
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= n_classes) {
            return Err(PearlError::InvalidLabel(format!(
                "row {i}: label {l} not below class count {n_classes}"
            )));
        }
        Ok(Targets::Class { labels, n_classes })
    }

    pub fn len(&self) -> usize {
        match self {
            Targets::Real(y) => y.len(),
            Targets::Class { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn select(&self, rows: &[usize]) -> Targets {
        match self {
            Targets::Real(y) => Targets::Real(rows.iter().map(|&i| y[i]).collect()),
            Targets::Class { labels, n_classes } => Targets::Class {
                labels: rows.iter().map(|&i| labels[i]).collect(),
                n_classes: *n_classes,
            },
        }
    }
}

fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
        let (r, c) = (pos % m.nrows(), pos / m.nrows());
        return Err(PearlError::NonFinite(format!("{what} at row {r}, column {c}")));
    }
    Ok(())
}

/// Feature matrix with targets; the labeled set used for downstream fits and weight tuning.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: DMatrix<f64>,
    target: Targets,
}

impl LabeledDataset {
    pub fn new(features: DMatrix<f64>, target: Targets) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(PearlError::Shape("labeled dataset needs n >= 1 and d >= 1".into()));
        }
        if features.nrows() != target.len() {
            return Err(PearlError::Shape(format!(
                "{} feature rows but {} targets",
                features.nrows(),
                target.len()
            )));
        }
        check_finite(&features, "feature")?;
        if let Targets::Real(y) = &target {
            if let Some(i) = y.iter().position(|v| !v.is_finite()) {
                return Err(PearlError::NonFinite(format!("target at row {i}")));
            }
        }
        Ok(Self { features, target })
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn target(&self) -> &Targets {
        &self.target
    }

    pub fn nrows(&self) -> usize {
        self.features.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.features.ncols()
    }

    pub fn into_parts(self) -> (DMatrix<f64>, Targets) {
        (self.features, self.target)
    }
}

/// Unlabeled feature rows used to fit representation learners.
#[derive(Debug, Clone, PartialEq)]
pub struct UnlabeledDataset {
    features: DMatrix<f64>,
}

impl UnlabeledDataset {
    pub fn new(features: DMatrix<f64>) -> Result<Self> {
        if features.nrows() < 2 {
            return Err(PearlError::Shape(format!(
                "unlabeled dataset needs at least 2 rows, got {}",
                features.nrows()
            )));
        }
        if features.ncols() == 0 {
            return Err(PearlError::Shape("unlabeled dataset needs d >= 1".into()));
        }
        check_finite(&features, "feature")?;
        Ok(Self { features })
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn nrows(&self) -> usize {
        self.features.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.features.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskKind {
    /// One real column.
    Regression,
    /// One probability column per class.
    Classification,
    /// One real column holding a binary margin.
    Margin,
}

/// Predictions for a set of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionBlock {
    values: DMatrix<f64>,
    kind: TaskKind,
}

pub(crate) const ROW_SUM_TOL: f64 = 1e-9;

impl PredictionBlock {
    pub fn regression(values: Vec<f64>) -> Result<Self> {
        Self::new(DMatrix::from_vec(values.len(), 1, values), TaskKind::Regression)
    }

    pub fn margins(values: Vec<f64>) -> Result<Self> {
        Self::new(DMatrix::from_vec(values.len(), 1, values), TaskKind::Margin)
    }

    pub fn probabilities(values: DMatrix<f64>) -> Result<Self> {
        Self::new(values, TaskKind::Classification)
    }

    pub fn new(values: DMatrix<f64>, kind: TaskKind) -> Result<Self> {
        check_finite(&values, "prediction")?;
        match kind {
            TaskKind::Regression | TaskKind::Margin => {
                if values.ncols() != 1 {
                    return Err(PearlError::Shape(format!(
                        "{kind:?} block must have one column, got {}",
                        values.ncols()
                    )));
                }
            }
            TaskKind::Classification => {
                if values.ncols() < 2 {
                    return Err(PearlError::Shape("probability block needs >= 2 columns".into()));
                }
                for (i, row) in values.row_iter().enumerate() {
                    if row.iter().any(|&p| p < 0.0) || (row.sum() - 1.0).abs() > ROW_SUM_TOL {
                        return Err(PearlError::InvalidArgument(format!(
                            "row {i} is not a probability vector"
                        )));
                    }
                }
            }
        }
        Ok(Self { values, kind })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn kind(&self) -> TaskKind {
        self.kind
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    /// First column as a slice; only meaningful for single-column blocks.
    pub fn column(&self) -> &[f64] {
        &self.values.as_slice()[..self.values.nrows()]
    }

    pub fn same_layout(&self, other: &PredictionBlock) -> bool {
        self.kind == other.kind && self.values.shape() == other.values.shape()
    }

    /// `Σ_j w_j · blocks[j]`; all blocks must share kind and shape.
    pub fn weighted_sum(blocks: &[PredictionBlock], weights: &[f64]) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| PearlError::InvalidArgument("no prediction blocks".into()))?;
        if blocks.len() != weights.len() {
            return Err(PearlError::Shape(format!(
                "{} blocks but {} weights",
                blocks.len(),
                weights.len()
            )));
        }
        if let Some(j) = blocks.iter().position(|b| !b.same_layout(first)) {
            return Err(PearlError::Shape(format!("block {j} differs in kind or shape")));
        }
        let mut acc = DMatrix::zeros(first.nrows(), first.ncols());
        for (b, &w) in blocks.iter().zip(weights) {
            if w != 0.0 {
                acc.zip_apply(&b.values, |a, v| *a += w * v);
            }
        }
        Ok(Self { values: acc, kind: first.kind })
    }

    pub(crate) fn from_parts_unchecked(values: DMatrix<f64>, kind: TaskKind) -> Self {
        Self { values, kind }
    }

    /// Scatter rows of `part` into positions `rows` of `self`.
    pub(crate) fn scatter_rows(&mut self, rows: &[usize], part: &PredictionBlock) {
        for (src, &dst) in rows.iter().enumerate() {
            self.values.set_row(dst, &part.values.row(src));
        }
    }
}

/// Rows of `m` in the given order.
pub fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |r, c| m[(rows[r], c)])
}
