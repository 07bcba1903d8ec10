//! Candidate representation sets built from the foundation representations.
//!
//! Indices are 0-based: FRL `m` is the m-th configured learner, and fusion column
//! `c` is column `c` of the horizontal concatenation of all foundation matrices.

use std::collections::HashMap;

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{PearlError, Result};

pub const MAX_FRLS: usize = 20;
pub const MAX_FUSION_COLUMNS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CandidateSpec {
    /// Concatenation of whole foundation matrices.
    FrlSubset { frls: Vec<usize> },
    /// Selected columns of the fusion matrix.
    FusionColumns { columns: Vec<usize> },
    /// A named, hand-picked set of foundation matrices.
    Explicit { name: String, frls: Vec<usize> },
}

impl CandidateSpec {
    pub fn label(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|i| i.to_string()).join("+");
        match self {
            CandidateSpec::FrlSubset { frls } => format!("frl[{}]", join(frls)),
            CandidateSpec::FusionColumns { columns } => format!("col[{}]", join(columns)),
            CandidateSpec::Explicit { name, .. } => name.clone(),
        }
    }
}

fn nonempty_subsets(count: usize) -> Vec<Vec<usize>> {
    (1..=count).flat_map(|size| (0..count).combinations(size)).collect()
}

/// All nonempty subsets of `m` learners: by size, then lexicographic; the full set last.
pub fn enumerate_frl_subsets(m: usize) -> Result<Vec<CandidateSpec>> {
    if !(1..=MAX_FRLS).contains(&m) {
        return Err(PearlError::InvalidArgument(format!(
            "learner count {m} outside 1..={MAX_FRLS}"
        )));
    }
    Ok(nonempty_subsets(m).into_iter().map(|frls| CandidateSpec::FrlSubset { frls }).collect())
}

/// All nonempty subsets of the fusion-matrix columns, in the same canonical order.
pub fn enumerate_fusion_columns(dims: &[usize]) -> Result<Vec<CandidateSpec>> {
    let p: usize = dims.iter().sum();
    if !(1..=MAX_FUSION_COLUMNS).contains(&p) {
        return Err(PearlError::InvalidArgument(format!(
            "fusion width {p} outside 1..={MAX_FUSION_COLUMNS}"
        )));
    }
    Ok(nonempty_subsets(p)
        .into_iter()
        .map(|columns| CandidateSpec::FusionColumns { columns })
        .collect())
}

#[derive(Clone, Serialize, Deserialize)]
struct PoolRepr {
    specs: Vec<CandidateSpec>,
    foundation_dims: Vec<usize>,
}

/// Ordered candidate list over foundation matrices of known widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PoolRepr", into = "PoolRepr")]
pub struct CandidatePool {
    specs: Vec<CandidateSpec>,
    foundation_dims: Vec<usize>,
    /// Fusion-matrix columns of each candidate, ascending.
    columns: Vec<Vec<usize>>,
}

impl TryFrom<PoolRepr> for CandidatePool {
    type Error = PearlError;

    fn try_from(r: PoolRepr) -> Result<Self> {
        Self::new(r.specs, r.foundation_dims)
    }
}

impl From<CandidatePool> for PoolRepr {
    fn from(p: CandidatePool) -> Self {
        PoolRepr { specs: p.specs, foundation_dims: p.foundation_dims }
    }
}

impl CandidatePool {
    pub fn new(specs: Vec<CandidateSpec>, foundation_dims: Vec<usize>) -> Result<Self> {
        if specs.is_empty() {
            return Err(PearlError::InvalidArgument("candidate pool is empty".into()));
        }
        if let Some(m) = foundation_dims.iter().position(|&d| d == 0) {
            return Err(PearlError::InvalidArgument(format!("learner {m} has zero width")));
        }
        let offsets: Vec<usize> = foundation_dims
            .iter()
            .scan(0, |acc, &d| {
                let o = *acc;
                *acc += d;
                Some(o)
            })
            .collect();
        let total: usize = foundation_dims.iter().sum();
        let m = foundation_dims.len();
        let check = |idx: &[usize], bound: usize, what: &str| -> Result<()> {
            if idx.is_empty() {
                return Err(PearlError::InvalidArgument(format!("empty {what} set")));
            }
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                return Err(PearlError::InvalidArgument(format!(
                    "{what} indices {idx:?} not strictly ascending"
                )));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= bound) {
                return Err(PearlError::InvalidArgument(format!(
                    "{what} index {bad} out of range (< {bound})"
                )));
            }
            Ok(())
        };
        let mut columns = Vec::with_capacity(specs.len());
        for spec in &specs {
            let cols = match spec {
                CandidateSpec::FrlSubset { frls } | CandidateSpec::Explicit { frls, .. } => {
                    check(frls, m, "learner")?;
                    frls.iter()
                        .flat_map(|&f| offsets[f]..offsets[f] + foundation_dims[f])
                        .collect()
                }
                CandidateSpec::FusionColumns { columns } => {
                    check(columns, total, "column")?;
                    columns.clone()
                }
            };
            columns.push(cols);
        }
        let mut seen = HashMap::new();
        for (j, cols) in columns.iter().enumerate() {
            if let Some(prev) = seen.insert(cols.clone(), j) {
                return Err(PearlError::InvalidArgument(format!(
                    "candidates {prev} and {j} select the same columns"
                )));
            }
        }
        Ok(Self { specs, foundation_dims, columns })
    }

    pub fn frl_subsets(foundation_dims: Vec<usize>) -> Result<Self> {
        Self::new(enumerate_frl_subsets(foundation_dims.len())?, foundation_dims)
    }

    pub fn fusion_columns(foundation_dims: Vec<usize>) -> Result<Self> {
        Self::new(enumerate_fusion_columns(&foundation_dims)?, foundation_dims)
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn specs(&self) -> &[CandidateSpec] {
        &self.specs
    }

    pub fn foundation_dims(&self) -> &[usize] {
        &self.foundation_dims
    }

    /// Fusion-matrix columns used by candidate `j`.
    pub fn columns(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn candidate_dim(&self, j: usize) -> usize {
        self.columns[j].len()
    }

    /// Candidate that uses every fusion column, if any.
    pub fn fusion_index(&self) -> Option<usize> {
        let total: usize = self.foundation_dims.iter().sum();
        self.columns.iter().position(|c| c.len() == total)
    }

    /// `(learner, candidate)` pairs for candidates that are exactly one learner's output.
    pub fn single_frl_candidates(&self) -> Vec<(usize, usize)> {
        let mut offset = 0;
        let mut out = Vec::new();
        for (m, &d) in self.foundation_dims.iter().enumerate() {
            let want: Vec<usize> = (offset..offset + d).collect();
            if let Some(j) = self.columns.iter().position(|c| *c == want) {
                out.push((m, j));
            }
            offset += d;
        }
        out
    }

    /// Candidate `j` realized from the foundation matrices (all with the same row count).
    pub fn realize(&self, foundation: &[DMatrix<f64>], j: usize) -> Result<DMatrix<f64>> {
        if j >= self.len() {
            return Err(PearlError::InvalidArgument(format!(
                "candidate {j} out of range (J = {})",
                self.len()
            )));
        }
        let dims: Vec<usize> = foundation.iter().map(|f| f.ncols()).collect();
        if dims != self.foundation_dims {
            return Err(PearlError::Shape(format!(
                "foundation widths {dims:?}, pool expects {:?}",
                self.foundation_dims
            )));
        }
        let n = foundation[0].nrows();
        if foundation.iter().any(|f| f.nrows() != n) {
            return Err(PearlError::Shape("foundation matrices differ in row count".into()));
        }
        let mut lookup = Vec::new();
        for (m, &d) in self.foundation_dims.iter().enumerate() {
            lookup.extend((0..d).map(|c| (m, c)));
        }
        let cols = &self.columns[j];
        let mut out = DMatrix::zeros(n, cols.len());
        for (k, &g) in cols.iter().enumerate() {
            let (m, c) = lookup[g];
            out.set_column(k, &foundation[m].column(c));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frls(v: &[usize]) -> CandidateSpec {
        CandidateSpec::FrlSubset { frls: v.to_vec() }
    }

    #[test]
    fn three_learners_give_seven_candidates() {
        let specs = enumerate_frl_subsets(3).unwrap();
        let expected = vec![
            frls(&[0]),
            frls(&[1]),
            frls(&[2]),
            frls(&[0, 1]),
            frls(&[0, 2]),
            frls(&[1, 2]),
            frls(&[0, 1, 2]),
        ];
        assert_eq!(specs, expected);
    }

    #[test]
    fn subset_counts() {
        assert_eq!(enumerate_frl_subsets(1).unwrap(), vec![frls(&[0])]);
        assert_eq!(enumerate_frl_subsets(5).unwrap().len(), 31);
        for m in 1..=10 {
            assert_eq!(enumerate_frl_subsets(m).unwrap().len(), (1 << m) - 1);
        }
        assert!(enumerate_frl_subsets(0).is_err());
        assert!(enumerate_frl_subsets(21).is_err());
    }

    #[test]
    fn fusion_column_counts() {
        assert_eq!(enumerate_fusion_columns(&[2, 2, 2]).unwrap().len(), 63);
        assert_eq!(enumerate_fusion_columns(&[1]).unwrap().len(), 1);
        let three = enumerate_fusion_columns(&[3]).unwrap();
        assert_eq!(three.len(), 7);
        assert_eq!(three[0], CandidateSpec::FusionColumns { columns: vec![0] });
        assert_eq!(three[2], CandidateSpec::FusionColumns { columns: vec![2] });
        assert!(enumerate_fusion_columns(&[10, 7]).is_err());
    }

    #[test]
    fn fusion_is_last_and_singletons_found() {
        let pool = CandidatePool::frl_subsets(vec![2, 1, 3]).unwrap();
        assert_eq!(pool.fusion_index(), Some(6));
        assert_eq!(pool.single_frl_candidates(), vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(CandidatePool::new(vec![frls(&[1, 0])], vec![1, 1]).is_err());
        assert!(CandidatePool::new(vec![frls(&[2])], vec![1, 1]).is_err());
        assert!(CandidatePool::new(vec![frls(&[])], vec![1, 1]).is_err());
        assert!(CandidatePool::new(vec![], vec![1]).is_err());
        let dup = vec![
            frls(&[0]),
            CandidateSpec::Explicit { name: "same".into(), frls: vec![0] },
        ];
        assert!(CandidatePool::new(dup, vec![2, 2]).is_err());
    }

    #[test]
    fn realize_concatenates() {
        let a = DMatrix::from_fn(3, 2, |r, c| (10 * r + c) as f64);
        let b = DMatrix::from_fn(3, 2, |r, c| (100 + 10 * r + c) as f64);
        let pool = CandidatePool::frl_subsets(vec![2, 2]).unwrap();
        let f = [a.clone(), b.clone()];
        assert_eq!(pool.realize(&f, 1).unwrap(), b);
        let both = pool.realize(&f, 2).unwrap();
        assert_eq!(both.columns(0, 2), a.columns(0, 2));
        assert_eq!(both.columns(2, 2), b.columns(0, 2));
        assert!(pool.realize(&f, 3).is_err());
        assert!(pool.realize(&[a], 0).is_err());
    }
}
