use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{PearlError, Result, Warning};

/// Penalty used when the unpenalized normal equations are singular.
pub const RIDGE_RETRY_LAMBDA: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    coef: Vec<f64>,
    intercept: f64,
    /// Penalty actually used (differs from the requested one after a retry).
    lambda: f64,
    warnings: Vec<Warning>,
}

impl RidgeModel {
    pub fn new(coef: Vec<f64>, intercept: f64) -> Self {
        Self { coef, intercept, lambda: 0.0, warnings: Vec::new() }
    }

    pub fn coef(&self) -> &[f64] {
        &self.coef
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn input_dim(&self) -> usize {
        self.coef.len()
    }

    pub fn predict(&self, z: &DMatrix<f64>) -> Result<Vec<f64>> {
        if z.ncols() != self.coef.len() {
            return Err(PearlError::Shape(format!(
                "ridge fitted on {} columns, got {}",
                self.coef.len(),
                z.ncols()
            )));
        }
        Ok(z.row_iter()
            .map(|r| self.intercept + r.iter().zip(&self.coef).map(|(a, b)| a * b).sum::<f64>())
            .collect())
    }
}

/// Solves `(ZcᵀZc + λI) β = Zcᵀ yc`; `None` when the system is numerically singular.
fn solve_centered(zc: &DMatrix<f64>, yc: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let p = zc.ncols();
    let mut a = zc.transpose() * zc;
    for i in 0..p {
        a[(i, i)] += lambda;
    }
    let b = zc.transpose() * yc;
    let scale = a.diagonal().amax();
    let chol = a.cholesky()?;
    let min_pivot = chol.l_dirty().diagonal().iter().fold(f64::INFINITY, |m, &v| m.min(v * v));
    if scale == 0.0 || min_pivot <= 1e-13 * scale {
        return None;
    }
    Some(chol.solve(&b))
}

/// Minimizes `‖y − Zβ − b‖² + λ‖β‖²` with the intercept unpenalized.
pub fn fit_ridge(z: &DMatrix<f64>, y: &[f64], lambda: f64) -> Result<RidgeModel> {
    let n = z.nrows();
    if n == 0 || n != y.len() {
        return Err(PearlError::Shape(format!("{} rows but {} targets", n, y.len())));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(PearlError::InvalidArgument(format!("ridge lambda {lambda} must be >= 0")));
    }
    let zmean = z.row_mean();
    let ymean = y.iter().sum::<f64>() / n as f64;
    let mut zc = z.clone();
    for mut r in zc.row_iter_mut() {
        r -= &zmean;
    }
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - ymean));

    let mut warnings = Vec::new();
    let mut used = lambda;
    let beta = match solve_centered(&zc, &yc, lambda) {
        Some(b) => b,
        None if lambda == 0.0 => {
            warnings.push(Warning::RidgeRetried { lambda: RIDGE_RETRY_LAMBDA });
            used = RIDGE_RETRY_LAMBDA;
            solve_centered(&zc, &yc, RIDGE_RETRY_LAMBDA)
                .or_else(|| {
                    let mut a = zc.transpose() * &zc;
                    for i in 0..a.nrows() {
                        a[(i, i)] += RIDGE_RETRY_LAMBDA;
                    }
                    a.lu().solve(&(zc.transpose() * &yc))
                })
                .ok_or_else(|| PearlError::InvalidArgument("ridge system is singular".into()))?
        }
        None => {
            let mut a = zc.transpose() * &zc;
            for i in 0..a.nrows() {
                a[(i, i)] += lambda;
            }
            a.lu()
                .solve(&(zc.transpose() * &yc))
                .ok_or_else(|| PearlError::InvalidArgument("ridge system is singular".into()))?
        }
    };
    let intercept = ymean - zmean.iter().zip(beta.iter()).map(|(m, b)| m * b).sum::<f64>();
    let coef: Vec<f64> = beta.iter().copied().collect();
    if !intercept.is_finite() || coef.iter().any(|c| !c.is_finite()) {
        return Err(PearlError::NonFinite("ridge coefficients".into()));
    }
    Ok(RidgeModel { coef, intercept, lambda: used, warnings })
}
