//! Multinomial logistic regression by full-batch gradient descent.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{PearlError, Result, Warning};

/// Margins are clamped to this magnitude.
pub const MARGIN_CLAMP: f64 = 30.0;
const ARMIJO_C: f64 = 1e-4;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxOptions {
    pub l2: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SoftmaxOptions {
    fn default() -> Self {
        Self { l2: 1e-4, max_iter: 5000, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxModel {
    /// (p + 1) × C; row 0 holds the intercepts.
    weights: DMatrix<f64>,
    iterations: usize,
    grad_norm: f64,
    warnings: Vec<Warning>,
}

fn augment(z: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(z.nrows(), z.ncols() + 1, |r, c| if c == 0 { 1.0 } else { z[(r, c - 1)] })
}

fn row_softmax(scores: &mut DMatrix<f64>) {
    for mut row in scores.row_iter_mut() {
        let max = row.max();
        row.apply(|v| *v = (*v - max).exp());
        let s = row.sum();
        row /= s;
    }
}

/// Mean cross entropy plus `l2/2 ‖W_{1..}‖²`.
fn objective(xa: &DMatrix<f64>, labels: &[usize], w: &DMatrix<f64>, l2: f64) -> f64 {
    let scores = xa * w;
    let ce: f64 = scores
        .row_iter()
        .zip(labels)
        .map(|(row, &y)| {
            let max = row.max();
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            lse - row[y]
        })
        .sum::<f64>()
        / labels.len() as f64;
    let penalty: f64 = w.rows(1, w.nrows() - 1).iter().map(|v| v * v).sum();
    ce + 0.5 * l2 * penalty
}

fn gradient(xa: &DMatrix<f64>, labels: &[usize], w: &DMatrix<f64>, l2: f64) -> DMatrix<f64> {
    let mut p = xa * w;
    row_softmax(&mut p);
    for (i, &y) in labels.iter().enumerate() {
        p[(i, y)] -= 1.0;
    }
    let mut g = xa.transpose() * p / labels.len() as f64;
    for r in 1..w.nrows() {
        for c in 0..w.ncols() {
            g[(r, c)] += l2 * w[(r, c)];
        }
    }
    g
}

/// Objective and gradient at `w`; exposed for finite-difference checks.
pub fn objective_and_gradient(
    z: &DMatrix<f64>,
    labels: &[usize],
    w: &DMatrix<f64>,
    l2: f64,
) -> (f64, DMatrix<f64>) {
    let xa = augment(z);
    (objective(&xa, labels, w, l2), gradient(&xa, labels, w, l2))
}

pub fn fit_softmax(
    z: &DMatrix<f64>,
    labels: &[usize],
    n_classes: usize,
    opts: &SoftmaxOptions,
) -> Result<SoftmaxModel> {
    if z.nrows() == 0 || z.nrows() != labels.len() {
        return Err(PearlError::Shape(format!("{} rows but {} labels", z.nrows(), labels.len())));
    }
    if n_classes < 2 {
        return Err(PearlError::InvalidArgument("softmax needs at least 2 classes".into()));
    }
    if opts.l2.is_nan() || opts.l2 < 0.0 || opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(PearlError::InvalidArgument("softmax needs l2 >= 0 and tol > 0".into()));
    }
    let mut counts = vec![0usize; n_classes];
    for &l in labels {
        if l >= n_classes {
            return Err(PearlError::InvalidLabel(format!("label {l} >= {n_classes}")));
        }
        counts[l] += 1;
    }
    if let Some(class) = counts.iter().position(|&c| c == 0) {
        return Err(PearlError::MissingClass { class });
    }

    let xa = augment(z);
    let mut w = DMatrix::zeros(z.ncols() + 1, n_classes);
    let mut f = objective(&xa, labels, &w, opts.l2);
    let mut g = gradient(&xa, labels, &w, opts.l2);
    let mut step = 1.0;
    let mut warnings = Vec::new();
    let mut iterations = 0;
    loop {
        let gnorm = g.amax();
        if gnorm < opts.tol {
            break;
        }
        if iterations >= opts.max_iter {
            warnings.push(Warning::NotConverged { iterations, residual: gnorm });
            break;
        }
        let g2 = g.norm_squared();
        let mut t = step;
        let accepted = loop {
            let cand = &w - &g * t;
            let fc = objective(&xa, labels, &cand, opts.l2);
            if fc <= f - ARMIJO_C * t * g2 {
                break Some((cand, fc));
            }
            t *= SHRINK;
            if t < 1e-20 {
                break None;
            }
        };
        let Some((next, fnext)) = accepted else {
            warnings.push(Warning::LineSearchStalled { iterations, residual: gnorm });
            break;
        };
        w = next;
        f = fnext;
        g = gradient(&xa, labels, &w, opts.l2);
        step = (2.0 * t).min(1e6);
        iterations += 1;
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(PearlError::NonFinite("softmax weights".into()));
    }
    Ok(SoftmaxModel { weights: w, iterations, grad_norm: g.amax(), warnings })
}

impl SoftmaxModel {
    pub fn from_weights(weights: DMatrix<f64>) -> Self {
        Self { weights, iterations: 0, grad_norm: f64::NAN, warnings: Vec::new() }
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad_norm
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn n_classes(&self) -> usize {
        self.weights.ncols()
    }

    pub fn input_dim(&self) -> usize {
        self.weights.nrows() - 1
    }

    fn scores(&self, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if z.ncols() != self.input_dim() {
            return Err(PearlError::Shape(format!(
                "softmax fitted on {} columns, got {}",
                self.input_dim(),
                z.ncols()
            )));
        }
        Ok(augment(z) * &self.weights)
    }

    pub fn predict_proba(&self, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut s = self.scores(z)?;
        row_softmax(&mut s);
        Ok(s)
    }

    /// `logit(p₁) = s₁ − s₀`, clamped to ±30; binary models only.
    pub fn predict_margins(&self, z: &DMatrix<f64>) -> Result<Vec<f64>> {
        if self.n_classes() != 2 {
            return Err(PearlError::InvalidArgument(format!(
                "margins need a binary model, got {} classes",
                self.n_classes()
            )));
        }
        let s = self.scores(z)?;
        Ok(s.row_iter()
            .map(|r| (r[1] - r[0]).clamp(-MARGIN_CLAMP, MARGIN_CLAMP))
            .collect())
    }
}
