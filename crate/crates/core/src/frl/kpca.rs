use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::eigen::top_eigenpairs;
use super::kernel::KernelSpec;
use super::pca::fix_signs;
use crate::data::UnlabeledDataset;
use crate::error::{PearlError, Result, Warning};

/// Eigenvalues at or below this are dropped.
pub const EIGEN_FLOOR: f64 = 1e-10;

/// Kernel PCA fitted on a set of training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpcaModel {
    kernel: KernelSpec,
    train: Vec<Vec<f64>>,
    /// Row means of the uncentered training kernel matrix.
    row_means: Vec<f64>,
    grand_mean: f64,
    eigenvalues: Vec<f64>,
    /// N × p: eigenvectors of the centered kernel matrix divided by sqrt(eigenvalue).
    coefs: DMatrix<f64>,
}

pub(crate) fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Uncentered kernel matrix over `rows`.
pub fn kernel_matrix(kernel: &KernelSpec, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(&rows[i], &rows[j]);
            if !v.is_finite() {
                return Err(PearlError::NonFinite(format!(
                    "{} kernel value for rows {i}, {j}",
                    kernel.name()
                )));
            }
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// Double-centers a symmetric kernel matrix; also returns its row means and grand mean.
pub fn center_kernel(k: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, f64) {
    let n = k.nrows();
    let row_means: Vec<f64> = k.row_iter().map(|r| r.sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let kc = DMatrix::from_fn(n, n, |i, j| k[(i, j)] - row_means[i] - row_means[j] + grand);
    (kc, row_means, grand)
}

pub fn fit_kpca(
    data: &UnlabeledDataset,
    kernel: KernelSpec,
    p: usize,
) -> Result<(KpcaModel, Vec<Warning>)> {
    let n = data.nrows();
    if p < 1 || p > n - 1 {
        return Err(PearlError::InvalidArgument(format!(
            "KPCA dimension {p} outside 1..={}",
            n - 1
        )));
    }
    kernel.validate()?;
    let train = rows_of(data.features());
    let k = kernel_matrix(&kernel, &train)?;
    let (kc, row_means, grand_mean) = center_kernel(&k);
    let (vals, vecs) = top_eigenpairs(&kc, p);
    let kept = vals.iter().take_while(|&&v| v > EIGEN_FLOOR).count();
    if kept == 0 {
        return Err(PearlError::InvalidArgument(format!(
            "{} kernel matrix has no eigenvalue above {EIGEN_FLOOR}",
            kernel.name()
        )));
    }
    let mut warnings = Vec::new();
    if kept < p {
        warnings.push(Warning::DimensionReduced { requested: p, kept });
    }
    let mut alphas = vecs.columns(0, kept).into_owned();
    fix_signs(&mut alphas);
    let eigenvalues: Vec<f64> = vals[..kept].to_vec();
    for (mut col, &l) in alphas.column_iter_mut().zip(&eigenvalues) {
        col /= l.sqrt();
    }
    Ok((
        KpcaModel { kernel, train, row_means, grand_mean, eigenvalues, coefs: alphas },
        warnings,
    ))
}

impl KpcaModel {
    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn input_dim(&self) -> usize {
        self.train.first().map_or(0, Vec::len)
    }

    pub fn output_dim(&self) -> usize {
        self.coefs.ncols()
    }

    pub fn transform(&self, rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if rows.ncols() != self.input_dim() {
            return Err(PearlError::Shape(format!(
                "KPCA fitted on {} columns, got {}",
                self.input_dim(),
                rows.ncols()
            )));
        }
        let n = self.train.len();
        let p = self.output_dim();
        let mut out = DMatrix::zeros(rows.nrows(), p);
        let mut kx = vec![0.0; n];
        let mut x = vec![0.0; rows.ncols()];
        for r in 0..rows.nrows() {
            for (c, v) in x.iter_mut().enumerate() {
                *v = rows[(r, c)];
            }
            for (slot, t) in kx.iter_mut().zip(&self.train) {
                *slot = self.kernel.eval(&x, t);
            }
            let mean = kx.iter().sum::<f64>() / n as f64;
            for c in 0..p {
                let col = self.coefs.column(c);
                let mut s = 0.0;
                for i in 0..n {
                    s += (kx[i] - mean - self.row_means[i] + self.grand_mean) * col[i];
                }
                out[(r, c)] = s;
            }
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(PearlError::NonFinite(format!("{} KPCA scores", self.kernel.name())));
        }
        Ok(out)
    }
}
