use nalgebra::{DMatrix, RowDVector};
use serde::{Deserialize, Serialize};

use crate::data::UnlabeledDataset;
use crate::error::{PearlError, Result, Warning};

/// Flip each column so its largest-magnitude entry (first on ties) is nonnegative.
pub(crate) fn fix_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mut best = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Linear projection onto the leading principal directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    means: RowDVector<f64>,
    /// d × p, orthonormal columns ordered by decreasing singular value.
    loadings: DMatrix<f64>,
    singular_values: Vec<f64>,
}

impl PcaModel {
    pub fn loadings(&self) -> &DMatrix<f64> {
        &self.loadings
    }

    pub fn means(&self) -> &RowDVector<f64> {
        &self.means
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn input_dim(&self) -> usize {
        self.loadings.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.loadings.ncols()
    }

    pub fn transform(&self, rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if rows.ncols() != self.input_dim() {
            return Err(PearlError::Shape(format!(
                "PCA fitted on {} columns, got {}",
                self.input_dim(),
                rows.ncols()
            )));
        }
        let mut centered = rows.clone();
        for mut r in centered.row_iter_mut() {
            r -= &self.means;
        }
        Ok(centered * &self.loadings)
    }
}

/// Top-`p` right singular vectors of the column-centered data.
///
/// Directions whose singular value is below `σ_max · max(N, d) · ε` are treated as
/// numerically absent; if fewer than `p` remain the output dimension shrinks.
pub fn fit_pca(data: &UnlabeledDataset, p: usize) -> Result<(PcaModel, Vec<Warning>)> {
    let (n, d) = (data.nrows(), data.ncols());
    if p < 1 || p > (n - 1).min(d) {
        return Err(PearlError::InvalidArgument(format!(
            "PCA dimension {p} outside 1..={}",
            (n - 1).min(d)
        )));
    }
    let x = data.features();
    let means = x.row_mean();
    let mut centered = x.clone();
    for mut r in centered.row_iter_mut() {
        r -= &means;
    }
    let svd = centered.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = svd.singular_values.as_slice();
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]).then(i.cmp(&j)));
    let smax = sv[order[0]];
    if smax == 0.0 {
        return Err(PearlError::InvalidArgument("PCA input has zero variance".into()));
    }
    let tol = smax * n.max(d) as f64 * f64::EPSILON;
    let rank = order.iter().filter(|&&i| sv[i] > tol).count();
    let kept = p.min(rank);
    let mut warnings = Vec::new();
    if kept < p {
        warnings.push(Warning::DimensionReduced { requested: p, kept });
    }
    let mut loadings = DMatrix::from_fn(d, kept, |r, c| v_t[(order[c], r)]);
    fix_signs(&mut loadings);
    let singular_values = order[..kept].iter().map(|&i| sv[i]).collect();
    Ok((PcaModel { means, loadings, singular_values }, warnings))
}
