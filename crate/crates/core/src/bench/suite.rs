//! Repeated synthetic experiments over a (σ, n) grid.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::synthetic::{generate_synthetic, SyntheticConfig, SyntheticData};
use crate::baselines::{run_baseline_on_outputs, BaselineKind};
use crate::candidates::CandidatePool;
use crate::config::ExperimentConfig;
use crate::data::PredictionBlock;
use crate::error::{PearlError, Result};
use crate::frl::{fit_frls, FittedFrl};
use crate::metrics::{metric_suite, Metrics};
use crate::rng::derive_seed;
use crate::weights::{fit_pipeline, make_cv_plan, solve_weights_naive, CvPlan, FittedPipeline};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "PEARL_THREADS";

/// Share of failed repetitions above which a suite aborts.
pub const MAX_FAILURE_RATE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    Pearl,
    Baseline(BaselineKind),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Pearl => "pearl",
            Method::Baseline(b) => b.method_name(),
        }
    }

    pub fn all() -> Vec<Method> {
        std::iter::once(Method::Pearl)
            .chain(BaselineKind::ALL.iter().map(|&b| Method::Baseline(b)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    pub sigma: f64,
    pub n: usize,
    pub rep: usize,
    pub metrics: Metrics,
    pub tau: Option<f64>,
    /// Wall time of the repetition's shared fit (learners, candidates, weights).
    pub runtime_ms: f64,
    pub weights: Option<Vec<f64>>,
}

impl ResultRow {
    fn sort_key(&self) -> (u64, usize, usize, Method) {
        (self.sigma.to_bits(), self.n, self.rep, self.method)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepFailure {
    pub sigma: f64,
    pub n: usize,
    pub rep: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<RepFailure>,
    /// Labels of the candidate pool, in weight order.
    pub candidate_labels: Vec<String>,
}

impl ExperimentResult {
    pub fn candidate_count(&self) -> usize {
        self.candidate_labels.len()
    }

    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }

    /// Mean test MSE of `method` in one grid cell.
    pub fn mean_mse(&self, method: Method, sigma: f64, n: usize) -> Option<f64> {
        let v: Vec<f64> = self
            .rows_for(method)
            .filter(|r| r.sigma == sigma && r.n == n)
            .map(|r| r.metrics.mse)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Runs `f` on a pool of `threads` workers, or `PEARL_THREADS` when not given.
/// Without either, the global pool is used.
pub fn with_thread_cap<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let threads = match threads {
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                PearlError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))
            })?),
            Err(_) => None,
        },
    };
    match threads {
        Some(0) => Err(PearlError::Config(format!("{THREADS_ENV} must be >= 1"))),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| PearlError::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Learners, pool and fold plan for one repetition.
pub(crate) struct RepSetup {
    pub data: SyntheticData,
    pub frls: Vec<FittedFrl>,
    pub pool: CandidatePool,
    pub plan: CvPlan,
}

pub(crate) fn setup_rep(cfg: &ExperimentConfig, syn: &SyntheticConfig, rep: usize) -> Result<RepSetup> {
    let data = generate_synthetic(syn, rep)?;
    let frls = fit_frls(&cfg.frls, &data.unlabeled)?;
    let pool = cfg.candidates.build_pool(frls.iter().map(FittedFrl::output_dim).collect())?;
    let plan = make_cv_plan(syn.n_labeled, cfg.cv.folds, derive_seed(&[syn.rep_seed(rep), 0xC5]))?;
    Ok(RepSetup { data, frls, pool, plan })
}

pub(crate) fn fit_rep(cfg: &ExperimentConfig, setup: RepSetup) -> Result<(SyntheticData, FittedPipeline)> {
    let RepSetup { data, frls, pool, plan } = setup;
    let pipeline = fit_pipeline(
        &data.labeled,
        frls,
        pool,
        &plan,
        &cfg.downstream,
        cfg.loss(),
        &cfg.solver.options,
    )?;
    Ok((data, pipeline))
}

fn run_rep(cfg: &ExperimentConfig, sigma: f64, n: usize, rep: usize) -> Result<(Vec<ResultRow>, Vec<String>)> {
    let syn = SyntheticConfig::from_experiment(cfg, sigma, n);
    let start = Instant::now();
    let (data, pipeline) = fit_rep(cfg, setup_rep(cfg, &syn, rep)?)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;

    let outputs = pipeline.model.candidate_outputs(data.test.features())?;
    let truth = data.test.target();
    let weights = pipeline.model.weights().as_slice();
    let pearl = PredictionBlock::weighted_sum(&outputs, weights)?;
    let mut rows = vec![ResultRow {
        method: Method::Pearl,
        sigma,
        n,
        rep,
        metrics: metric_suite(truth, &pearl)?,
        tau: None,
        runtime_ms,
        weights: Some(weights.to_vec()),
    }];
    for kind in BaselineKind::ALL {
        let out = run_baseline_on_outputs(kind, &pipeline, &outputs, Some(truth))?;
        rows.push(ResultRow {
            method: Method::Baseline(kind),
            sigma,
            n,
            rep,
            metrics: metric_suite(truth, &out.prediction)?,
            tau: None,
            runtime_ms,
            weights: None,
        });
    }
    if let Some(r) = rows.iter().find(|r| !r.metrics.mse.is_finite()) {
        return Err(PearlError::NonFinite(format!("{} test mse", r.method.name())));
    }
    Ok((rows, pipeline.model.pool().specs().iter().map(|s| s.label()).collect()))
}

pub(crate) fn grid_cells(sigmas: &[f64], ns: &[usize], reps: usize) -> Vec<(f64, usize, usize)> {
    let mut cells = Vec::with_capacity(sigmas.len() * ns.len() * reps);
    for &s in sigmas {
        for &n in ns {
            cells.extend((0..reps).map(|r| (s, n, r)));
        }
    }
    cells
}

/// Collects per-repetition results, excluding failures unless they exceed the allowed rate.
pub(crate) fn collect_reps<T>(
    cells: &[(f64, usize, usize)],
    outcomes: Vec<Result<Vec<T>>>,
) -> Result<(Vec<T>, Vec<RepFailure>)> {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (&(sigma, n, rep), out) in cells.iter().zip(outcomes) {
        match out {
            Ok(r) => rows.extend(r),
            Err(e) => {
                log::warn!("sigma={sigma} n={n} rep={rep} failed: {e}");
                failures.push(RepFailure { sigma, n, rep, error: e.to_string() });
            }
        }
    }
    if failures.len() as f64 > MAX_FAILURE_RATE * cells.len() as f64 {
        return Err(PearlError::Suite(format!(
            "{} of {} repetitions failed; first: {}",
            failures.len(),
            cells.len(),
            failures[0].error
        )));
    }
    Ok((rows, failures))
}

/// PEARL and every baseline on each (σ, n, rep) of the configured grid.
pub fn run_synthetic_suite(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let g = &cfg.synthetic;
    let cells = grid_cells(&g.sigmas, &g.ns, g.reps);
    let outcomes: Vec<Result<(Vec<ResultRow>, Vec<String>)>> =
        cells.par_iter().map(|&(s, n, r)| run_rep(cfg, s, n, r)).collect();
    let mut candidate_labels = Vec::new();
    let outcomes = outcomes
        .into_iter()
        .map(|o| {
            o.map(|(rows, labels)| {
                if candidate_labels.is_empty() {
                    candidate_labels = labels;
                }
                rows
            })
        })
        .collect();
    let (mut rows, failures) = collect_reps(&cells, outcomes)?;
    rows.sort_by_key(ResultRow::sort_key);
    Ok(ExperimentResult { rows, failures, candidate_labels })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaiveComparison {
    pub rep: usize,
    pub cv_mse: f64,
    pub naive_mse: f64,
}

/// Test MSE of cross-validated weights against weights tuned on in-sample fits,
/// with the same full-data candidate predictors.
pub fn compare_naive_weights(
    cfg: &ExperimentConfig,
    sigma: f64,
    n: usize,
    reps: usize,
) -> Result<Vec<NaiveComparison>> {
    let syn = SyntheticConfig::from_experiment(cfg, sigma, n);
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let (data, pipeline) = fit_rep(cfg, setup_rep(cfg, &syn, rep)?)?;
            let naive = solve_weights_naive(
                &data.labeled,
                pipeline.model.pool(),
                &pipeline.train_foundation,
                &cfg.downstream,
                cfg.loss(),
                &cfg.solver.options,
            )?;
            let outputs = pipeline.model.candidate_outputs(data.test.features())?;
            let mse = |w: &[f64]| -> Result<f64> {
                Ok(metric_suite(data.test.target(), &PredictionBlock::weighted_sum(&outputs, w)?)?.mse)
            };
            Ok(NaiveComparison {
                rep,
                cv_mse: mse(pipeline.model.weights().as_slice())?,
                naive_mse: mse(naive.weights.as_slice())?,
            })
        })
        .collect()
}
