//! Simplex-constrained minimization of the averaged surrogate loss
//! `F(w) = n⁻¹ Σᵢ V(yᵢ, Σⱼ wⱼ ỹᵢⱼ)` by projected gradient descent.

use serde::{Deserialize, Serialize};

use super::cv::CvPredictionTable;
use super::simplex::{project_to_simplex, WeightVector};
use crate::data::{PredictionBlock, Targets};
use crate::error::{PearlError, Result, Warning};
use crate::loss::SurrogateLoss;

const ARMIJO_C: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MIN_STEP: f64 = 1e-20;
/// Final weights below this are set to zero.
pub const PRUNE_BELOW: f64 = 1e-12;
/// A stalled line search with a residual under this is not reported.
const STALL_QUIET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOptions {
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_max_iter() -> usize {
    10_000
}
fn default_tol() -> f64 {
    1e-9
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iter: default_max_iter(), tol: default_tol() }
    }
}

/// Solver output and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub objective: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub weights: WeightVector,
    pub warnings: Vec<Warning>,
    /// `F(e_j)` for every candidate.
    pub vertex_objectives: Vec<f64>,
}

/// `F(w)` for explicit weights.
pub fn objective(
    blocks: &[PredictionBlock],
    truth: &Targets,
    loss: SurrogateLoss,
    w: &[f64],
) -> Result<f64> {
    loss.value(truth, &PredictionBlock::weighted_sum(blocks, w)?)
}

fn value_and_gradient(
    blocks: &[PredictionBlock],
    truth: &Targets,
    loss: SurrogateLoss,
    w: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let mix = PredictionBlock::weighted_sum(blocks, w)?;
    let f = loss.value(truth, &mix)?;
    let g = loss.gradient(truth, &mix)?;
    let grad = blocks.iter().map(|b| g.dot(b.values())).collect();
    Ok((f, grad))
}

fn mapping_residual(w: &[f64], g: &[f64]) -> f64 {
    let shifted: Vec<f64> = w.iter().zip(g).map(|(a, b)| a - b).collect();
    let p = project_to_simplex(&shifted);
    w.iter().zip(p.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

struct Run {
    w: Vec<f64>,
    f: f64,
    iterations: usize,
    residual: f64,
    warnings: Vec<Warning>,
}

fn descend(
    blocks: &[PredictionBlock],
    truth: &Targets,
    loss: SurrogateLoss,
    start: Vec<f64>,
    opts: &SolverOptions,
) -> Result<Run> {
    let mut w = start;
    let (mut f, mut g) = value_and_gradient(blocks, truth, loss, &w)?;
    let mut step = 1.0;
    let mut iterations = 0;
    let mut warnings = Vec::new();
    let residual = loop {
        let r = mapping_residual(&w, &g);
        if r < opts.tol {
            break r;
        }
        if iterations >= opts.max_iter {
            warnings.push(Warning::NotConverged { iterations, residual: r });
            break r;
        }
        let mut t = step;
        let accepted = loop {
            let trial: Vec<f64> = w.iter().zip(&g).map(|(a, b)| a - t * b).collect();
            let wn = project_to_simplex(&trial).as_slice().to_vec();
            let decrease: f64 = g.iter().zip(wn.iter().zip(&w)).map(|(gi, (a, b))| gi * (a - b)).sum();
            if decrease < 0.0 {
                let fnew = objective(blocks, truth, loss, &wn)?;
                if fnew <= f + ARMIJO_C * decrease {
                    break Some((wn, fnew));
                }
            }
            t *= SHRINK;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some((wn, fnew)) = accepted else {
            if r >= STALL_QUIET {
                warnings.push(Warning::LineSearchStalled { iterations, residual: r });
            }
            break r;
        };
        w = wn;
        f = fnew;
        g = value_and_gradient(blocks, truth, loss, &w)?.1;
        step = (2.0 * t).min(1e12);
        iterations += 1;
    };
    Ok(Run { w, f, iterations, residual, warnings })
}

/// Minimizes `F` over the simplex starting from uniform weights.
///
/// Steps use Armijo backtracking along the projection arc (first trial step 1.0, then
/// twice the last accepted step). The hinge subgradient is 0 at its kink. If the
/// descent ends above the best single-candidate objective, a second descent starts
/// from that vertex and the lower result is kept.
pub fn minimize_on_simplex(
    blocks: &[PredictionBlock],
    truth: &Targets,
    loss: SurrogateLoss,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    let j = blocks.len();
    if j == 0 {
        return Err(PearlError::InvalidArgument("no candidates to weight".into()));
    }
    let mut vertex_objectives = Vec::with_capacity(j);
    for (i, b) in blocks.iter().enumerate() {
        if !b.same_layout(&blocks[0]) {
            return Err(PearlError::Shape(format!("candidate {i} differs in kind or shape")));
        }
        let v = loss.value(truth, b)?;
        if !v.is_finite() {
            return Err(PearlError::NonFinite(format!("objective of candidate {i}")));
        }
        vertex_objectives.push(v);
    }
    if j == 1 {
        return Ok(SolveReport {
            objective: vertex_objectives[0],
            iterations: 0,
            kkt_residual: 0.0,
            weights: WeightVector::vertex(1, 0),
            warnings: Vec::new(),
            vertex_objectives,
        });
    }

    let mut run = descend(blocks, truth, loss, WeightVector::uniform(j).as_slice().to_vec(), opts)?;
    let best_vertex = (0..j)
        .min_by(|&a, &b| vertex_objectives[a].total_cmp(&vertex_objectives[b]).then(a.cmp(&b)))
        .expect("j >= 1");
    if vertex_objectives[best_vertex] < run.f {
        let start = WeightVector::vertex(j, best_vertex).as_slice().to_vec();
        let alt = descend(blocks, truth, loss, start, opts)?;
        if alt.f < run.f {
            run = Run { iterations: run.iterations + alt.iterations, ..alt };
        }
    }

    let weights = WeightVector::new(run.w)?.pruned(PRUNE_BELOW);
    let objective = objective(blocks, truth, loss, weights.as_slice())?;
    if !objective.is_finite() {
        return Err(PearlError::NonFinite("weighted objective".into()));
    }
    Ok(SolveReport {
        objective,
        iterations: run.iterations,
        kkt_residual: run.residual,
        weights,
        warnings: run.warnings,
        vertex_objectives,
    })
}

/// Weights minimizing the cross-validated surrogate objective.
pub fn solve_weights(
    table: &CvPredictionTable,
    loss: SurrogateLoss,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    minimize_on_simplex(table.blocks(), table.truth(), loss, opts)
}
