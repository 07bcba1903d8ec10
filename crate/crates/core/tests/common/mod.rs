#![allow(dead_code)]

use nalgebra::DMatrix;
use pearl::data::{PredictionBlock, Targets};
use pearl::loss::SurrogateLoss;
use pearl::rng::{seeded_rng, standard_normal, PearlRng};
use rand::Rng;

pub fn normal_matrix(rng: &mut PearlRng, n: usize, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, d, |_, _| standard_normal(rng))
}

pub fn softmax_rows(logits: &DMatrix<f64>) -> DMatrix<f64> {
    let mut p = logits.clone();
    for mut row in p.row_iter_mut() {
        let m = row.max();
        row.apply(|v| *v = (*v - m).exp());
        let s = row.sum();
        row /= s;
    }
    p
}

/// Candidate outputs of varying quality for a random problem under `loss`.
pub fn random_instance(loss: SurrogateLoss, seed: u64, n: usize, j: usize) -> (Vec<PredictionBlock>, Targets) {
    let mut rng = seeded_rng(seed);
    match loss {
        SurrogateLoss::SquaredError => {
            let y: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
            let blocks = (0..j)
                .map(|_| {
                    let noise = rng.random_range(0.1..1.5);
                    let shift = 0.3 * standard_normal(&mut rng);
                    PredictionBlock::regression(
                        y.iter().map(|v| v + shift + noise * standard_normal(&mut rng)).collect(),
                    )
                    .unwrap()
                })
                .collect();
            (blocks, Targets::Real(y))
        }
        SurrogateLoss::CrossEntropy => {
            let c = 3;
            let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
            let blocks = (0..j)
                .map(|_| {
                    let signal = rng.random_range(0.0..2.0);
                    let logits = DMatrix::from_fn(n, c, |i, k| {
                        standard_normal(&mut rng) + if labels[i] == k { signal } else { 0.0 }
                    });
                    PredictionBlock::probabilities(softmax_rows(&logits)).unwrap()
                })
                .collect();
            (blocks, Targets::classes(labels, c).unwrap())
        }
        SurrogateLoss::Hinge => {
            let y: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
            let blocks = (0..j)
                .map(|_| {
                    let signal = rng.random_range(0.0..2.0);
                    PredictionBlock::margins(
                        y.iter().map(|v| signal * v + standard_normal(&mut rng)).collect(),
                    )
                    .unwrap()
                })
                .collect();
            (blocks, Targets::Real(y))
        }
    }
}

/// All points of the simplex in `j` dimensions on a grid of the given resolution.
pub fn simplex_grid(j: usize, steps: usize) -> Vec<Vec<f64>> {
    let h = 1.0 / steps as f64;
    match j {
        2 => (0..=steps).map(|a| vec![a as f64 * h, (steps - a) as f64 * h]).collect(),
        3 => (0..=steps)
            .flat_map(|a| {
                (0..=steps - a).map(move |b| vec![a as f64 * h, b as f64 * h, (steps - a - b) as f64 * h])
            })
            .collect(),
        _ => panic!("grid only for j in {{2, 3}}"),
    }
}
