//! Two-dimensional Gaussian design with a quadratic signal plus `sin²(x₁)`.
//!
//! `y = β₀ + β₁x₁ + β₂x₂ + α₁x₁² + α₂x₂² + γx₁x₂ + sin²(x₁) + ε`, with
//! `x ~ N(0, I₂)`, `ε ~ N(0, σ²)` and each coefficient drawn from `N(0, 0.09)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::{CoefPolicy, ExperimentConfig};
use crate::data::{LabeledDataset, Targets, UnlabeledDataset};
use crate::error::{PearlError, Result};
use crate::rng::{derive_seed, standard_normal, substream, PearlRng};

pub const COEF_SD: f64 = 0.3;

const STREAM_UNLABELED: u64 = 0;
const STREAM_LABELED: u64 = 1;
const STREAM_TEST: u64 = 2;
const STREAM_COEFS: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Coefficients {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub gamma: f64,
}

impl Coefficients {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn draw(rng: &mut PearlRng) -> Self {
        let mut c = || COEF_SD * standard_normal(rng);
        Self { beta0: c(), beta1: c(), beta2: c(), alpha1: c(), alpha2: c(), gamma: c() }
    }

    /// Noise-free regression function.
    pub fn mean(&self, x1: f64, x2: f64) -> f64 {
        self.beta0
            + self.beta1 * x1
            + self.beta2 * x2
            + self.alpha1 * x1 * x1
            + self.alpha2 * x2 * x2
            + self.gamma * x1 * x2
            + x1.sin().powi(2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub sigma: f64,
    pub n_labeled: usize,
    pub n_unlabeled: usize,
    pub n_test: usize,
    pub reps: usize,
    pub seed: u64,
    pub coef_policy: CoefPolicy,
    /// Replaces the random coefficients when set.
    pub coefficients: Option<Coefficients>,
}

impl SyntheticConfig {
    pub fn from_experiment(cfg: &ExperimentConfig, sigma: f64, n_labeled: usize) -> Self {
        Self {
            sigma,
            n_labeled,
            n_unlabeled: cfg.synthetic.n_unlabeled,
            n_test: cfg.synthetic.n_test,
            reps: cfg.synthetic.reps,
            seed: cfg.seed,
            coef_policy: cfg.synthetic.coef_policy,
            coefficients: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(PearlError::InvalidArgument(format!("sigma {} must be >= 0", self.sigma)));
        }
        if self.n_labeled == 0 || self.n_unlabeled < 2 || self.n_test == 0 || self.reps == 0 {
            return Err(PearlError::InvalidArgument(
                "sample sizes and repetition count must be >= 1 (unlabeled >= 2)".into(),
            ));
        }
        Ok(())
    }

    /// Seed of repetition `rep`, a hash of (base seed, σ, n, rep).
    pub fn rep_seed(&self, rep: usize) -> u64 {
        derive_seed(&[self.seed, self.sigma.to_bits(), self.n_labeled as u64, rep as u64])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub unlabeled: UnlabeledDataset,
    pub labeled: LabeledDataset,
    pub test: LabeledDataset,
    pub coefficients: Coefficients,
}

fn sample_design(rng: &mut PearlRng, n: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(n, 2);
    for i in 0..n {
        x[(i, 0)] = standard_normal(rng);
        x[(i, 1)] = standard_normal(rng);
    }
    x
}

/// `n` labelled draws from `rng`.
pub fn sample_dgp(rng: &mut PearlRng, n: usize, sigma: f64, coefs: &Coefficients) -> Result<LabeledDataset> {
    let x = sample_design(rng, n);
    let y = (0..n)
        .map(|i| coefs.mean(x[(i, 0)], x[(i, 1)]) + sigma * standard_normal(rng))
        .collect();
    LabeledDataset::new(x, Targets::Real(y))
}

pub fn generate_synthetic(cfg: &SyntheticConfig, rep: usize) -> Result<SyntheticData> {
    cfg.validate()?;
    let seed = cfg.rep_seed(rep);
    let coefficients = match (cfg.coefficients, cfg.coef_policy) {
        (Some(c), _) => c,
        (None, CoefPolicy::PerRep) => Coefficients::draw(&mut substream(seed, STREAM_COEFS)),
        (None, CoefPolicy::Fixed) => {
            Coefficients::draw(&mut substream(derive_seed(&[cfg.seed]), STREAM_COEFS))
        }
    };
    let unlabeled =
        UnlabeledDataset::new(sample_design(&mut substream(seed, STREAM_UNLABELED), cfg.n_unlabeled))?;
    let labeled = sample_dgp(&mut substream(seed, STREAM_LABELED), cfg.n_labeled, cfg.sigma, &coefficients)?;
    let test = sample_dgp(&mut substream(seed, STREAM_TEST), cfg.n_test, cfg.sigma, &coefficients)?;
    Ok(SyntheticData { unlabeled, labeled, test, coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SyntheticConfig {
        SyntheticConfig {
            sigma: 0.5,
            n_labeled: 50,
            n_unlabeled: 80,
            n_test: 30,
            reps: 2,
            seed: 11,
            coef_policy: CoefPolicy::PerRep,
            coefficients: None,
        }
    }

    #[test]
    fn same_rep_same_data() {
        let a = generate_synthetic(&cfg(), 1).unwrap();
        let b = generate_synthetic(&cfg(), 1).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&cfg(), 0).unwrap();
        assert_ne!(a.labeled, c.labeled);
        assert_ne!(a.coefficients, c.coefficients);
    }

    #[test]
    fn fixed_policy_shares_coefficients() {
        let mut c = cfg();
        c.coef_policy = CoefPolicy::Fixed;
        let a = generate_synthetic(&c, 0).unwrap();
        let b = generate_synthetic(&c, 1).unwrap();
        assert_eq!(a.coefficients, b.coefficients);
        assert_ne!(a.labeled, b.labeled);
    }

    #[test]
    fn splits_share_no_rows() {
        let d = generate_synthetic(&cfg(), 0).unwrap();
        let rows = |m: &DMatrix<f64>| -> Vec<(u64, u64)> {
            (0..m.nrows()).map(|i| (m[(i, 0)].to_bits(), m[(i, 1)].to_bits())).collect()
        };
        let u = rows(d.unlabeled.features());
        let l = rows(d.labeled.features());
        let t = rows(d.test.features());
        assert!(l.iter().all(|r| !u.contains(r) && !t.contains(r)));
        assert!(t.iter().all(|r| !u.contains(r)));
    }

    #[test]
    fn zero_noise_matches_mean() {
        let mut c = cfg();
        c.sigma = 0.0;
        let d = generate_synthetic(&c, 0).unwrap();
        let Targets::Real(y) = d.labeled.target() else { panic!() };
        let x = d.labeled.features();
        for i in 0..y.len() {
            assert_eq!(y[i], d.coefficients.mean(x[(i, 0)], x[(i, 1)]));
        }
    }

    #[test]
    fn rejects_negative_sigma() {
        let mut c = cfg();
        c.sigma = -1.0;
        assert!(generate_synthetic(&c, 0).is_err());
    }
}
