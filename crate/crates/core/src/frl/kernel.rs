use serde::{Deserialize, Serialize};

use crate::error::{PearlError, Result};

/// Kernel functions for KPCA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `<u, v>`
    Linear,
    /// `exp(-gamma ||u - v||^2)`
    Gaussian { gamma: f64 },
    /// `(gamma <u, v> + coef0)^degree`
    Polynomial { degree: u32, gamma: f64, coef0: f64 },
    /// `tanh(gamma <u, v> + coef0)`
    Sigmoid { gamma: f64, coef0: f64 },
    /// `<u, v> / (||u|| ||v||)`, zero when either norm is zero
    Cosine,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(PearlError::InvalidArgument(format!("kernel {what}")));
        match *self {
            KernelSpec::Gaussian { gamma } | KernelSpec::Sigmoid { gamma, .. }
                if !(gamma > 0.0 && gamma.is_finite()) =>
            {
                bad("gamma must be positive")
            }
            KernelSpec::Polynomial { degree, gamma, coef0 } => {
                if degree < 1 {
                    bad("degree must be >= 1")
                } else if !(gamma > 0.0 && gamma.is_finite()) {
                    bad("gamma must be positive")
                } else if !coef0.is_finite() {
                    bad("coef0 must be finite")
                } else {
                    Ok(())
                }
            }
            KernelSpec::Sigmoid { coef0, .. } if !coef0.is_finite() => bad("coef0 must be finite"),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(a, b),
            KernelSpec::Gaussian { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
            KernelSpec::Polynomial { degree, gamma, coef0 } => {
                (gamma * dot(a, b) + coef0).powi(degree as i32)
            }
            KernelSpec::Sigmoid { gamma, coef0 } => (gamma * dot(a, b) + coef0).tanh(),
            KernelSpec::Cosine => {
                let na = dot(a, a).sqrt();
                let nb = dot(b, b).sqrt();
                if na == 0.0 || nb == 0.0 {
                    0.0
                } else {
                    dot(a, b) / (na * nb)
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Linear => "linear",
            KernelSpec::Gaussian { .. } => "gaussian",
            KernelSpec::Polynomial { .. } => "polynomial",
            KernelSpec::Sigmoid { .. } => "sigmoid",
            KernelSpec::Cosine => "cosine",
        }
    }
}
