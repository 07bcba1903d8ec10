use serde::{Deserialize, Serialize};

use crate::error::{PearlError, Result};

/// Entries this close below zero are treated as rounding noise.
pub const NEGATIVE_SLACK: f64 = 1e-12;
pub const SUM_TOL: f64 = 1e-9;

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(mut w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(PearlError::InvalidArgument("empty weight vector".into()));
        }
        for (j, v) in w.iter_mut().enumerate() {
            if !v.is_finite() || *v < -NEGATIVE_SLACK {
                return Err(PearlError::InvalidArgument(format!("weight {j} is {v}")));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(PearlError::InvalidArgument(format!("weights sum to {s}")));
        }
        Ok(Self(w))
    }

    pub fn uniform(j: usize) -> Self {
        Self(vec![1.0 / j as f64; j])
    }

    pub fn vertex(j: usize, at: usize) -> Self {
        let mut w = vec![0.0; j];
        w[at] = 1.0;
        Self(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Zeroes entries below `threshold` and renormalizes.
    pub fn pruned(&self, threshold: f64) -> Self {
        let mut w: Vec<f64> = self.0.iter().map(|&v| if v < threshold { 0.0 } else { v }).collect();
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            w.iter_mut().for_each(|v| *v /= s);
            Self(w)
        } else {
            self.clone()
        }
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = PearlError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Euclidean projection onto `{w ≥ 0, Σw = 1}` by sorting and thresholding.
pub fn project_to_simplex(v: &[f64]) -> WeightVector {
    assert!(!v.is_empty(), "projection of an empty vector");
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumsum += ui;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    let mut w: Vec<f64> = v.iter().map(|&x| (x - theta).max(0.0)).collect();
    let s: f64 = w.iter().sum();
    if s > 0.0 && (s - 1.0).abs() > 1e-15 {
        w.iter_mut().for_each(|x| *x /= s);
    }
    WeightVector(w)
}
