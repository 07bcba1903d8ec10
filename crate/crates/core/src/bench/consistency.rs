//! Weight placed on a correctly specified candidate as the labelled sample grows.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::suite::{collect_reps, fit_rep, grid_cells, setup_rep, Method, RepFailure, ResultRow};
use super::synthetic::SyntheticConfig;
use crate::candidates::{CandidatePool, CandidateSpec};
use crate::config::{ConsistencySettings, ExperimentConfig};
use crate::data::PredictionBlock;
use crate::error::{PearlError, Result};
use crate::frl::{FittedFrl, RepresentationLearner};
use crate::metrics::metric_suite;

pub const ORACLE_NAME: &str = "oracle";

/// The true regressors of the synthetic model: `(x₁, x₂, x₁², x₂², x₁x₂, sin²x₁)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleFeatures;

impl RepresentationLearner for OracleFeatures {
    fn name(&self) -> String {
        ORACLE_NAME.into()
    }

    fn input_dim(&self) -> usize {
        2
    }

    fn output_dim(&self) -> usize {
        6
    }

    fn transform(&self, rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if rows.ncols() != 2 {
            return Err(PearlError::Shape(format!("oracle features need 2 columns, got {}", rows.ncols())));
        }
        Ok(DMatrix::from_fn(rows.nrows(), 6, |i, k| {
            let (a, b) = (rows[(i, 0)], rows[(i, 1)]);
            match k {
                0 => a,
                1 => b,
                2 => a * a,
                3 => b * b,
                4 => a * b,
                _ => a.sin().powi(2),
            }
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauPoint {
    pub n: usize,
    pub reps: usize,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyResult {
    pub sigma: f64,
    pub rows: Vec<ResultRow>,
    pub curve: Vec<TauPoint>,
    pub failures: Vec<RepFailure>,
    /// Index of the oracle candidate, if included.
    pub oracle_candidate: Option<usize>,
}

/// Appends the oracle learner and its singleton candidate.
fn with_oracle(frls: &mut Vec<FittedFrl>, pool: &CandidatePool) -> Result<(CandidatePool, usize)> {
    frls.push(FittedFrl::custom(Arc::new(OracleFeatures))?);
    let mut specs = pool.specs().to_vec();
    specs.push(CandidateSpec::Explicit { name: ORACLE_NAME.into(), frls: vec![frls.len() - 1] });
    let dims = frls.iter().map(FittedFrl::output_dim).collect();
    let j = specs.len() - 1;
    Ok((CandidatePool::new(specs, dims)?, j))
}

fn run_rep(cfg: &ExperimentConfig, s: &ConsistencySettings, n: usize, rep: usize) -> Result<Vec<ResultRow>> {
    let syn = SyntheticConfig::from_experiment(cfg, s.sigma, n);
    let start = Instant::now();
    let mut setup = setup_rep(cfg, &syn, rep)?;
    let oracle = if s.include_oracle {
        let (pool, j) = with_oracle(&mut setup.frls, &setup.pool)?;
        setup.pool = pool;
        Some(j)
    } else {
        None
    };
    let (data, pipeline) = fit_rep(cfg, setup)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let w = pipeline.model.weights().as_slice();
    let outputs = pipeline.model.candidate_outputs(data.test.features())?;
    let pred = PredictionBlock::weighted_sum(&outputs, w)?;
    Ok(vec![ResultRow {
        method: Method::Pearl,
        sigma: s.sigma,
        n,
        rep,
        metrics: metric_suite(data.test.target(), &pred)?,
        tau: Some(oracle.map_or(0.0, |j| w[j])),
        runtime_ms,
        weights: Some(w.to_vec()),
    }])
}

/// Mean and sample standard deviation; the deviation is NaN for fewer than two values.
pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() < 2 {
        f64::NAN
    } else {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (mean, sd)
}

/// τ̂ = weight on the oracle singleton, averaged over repetitions at each n.
pub fn run_weight_consistency(cfg: &ExperimentConfig, s: &ConsistencySettings) -> Result<ConsistencyResult> {
    cfg.validate()?;
    if s.reps == 0 || s.ns.is_empty() || s.ns.contains(&0) || s.sigma.is_nan() || s.sigma < 0.0 {
        return Err(PearlError::Config("consistency grid needs reps >= 1, positive ns, sigma >= 0".into()));
    }
    let cells = grid_cells(&[s.sigma], &s.ns, s.reps);
    let outcomes: Vec<_> = cells.par_iter().map(|&(_, n, r)| run_rep(cfg, s, n, r)).collect();
    let (rows, failures) = collect_reps(&cells, outcomes)?;
    let curve = s
        .ns
        .iter()
        .filter_map(|&n| {
            let taus: Vec<f64> = rows.iter().filter(|r| r.n == n).filter_map(|r| r.tau).collect();
            (!taus.is_empty()).then(|| {
                let (mean, sd) = mean_sd(&taus);
                TauPoint { n, reps: taus.len(), mean, sd }
            })
        })
        .collect();
    let oracle_candidate = s.include_oracle.then(|| {
        rows.first().and_then(|r| r.weights.as_ref()).map_or(0, |w| w.len() - 1)
    });
    Ok(ConsistencyResult { sigma: s.sigma, rows, curve, failures, oracle_candidate })
}
