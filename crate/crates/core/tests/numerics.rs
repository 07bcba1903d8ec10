mod common;

use common::{normal_matrix, random_instance};
use nalgebra::{DMatrix, SymmetricEigen};
use pearl::data::{PredictionBlock, Targets, TaskKind, UnlabeledDataset};
use pearl::downstream::ridge::fit_ridge;
use pearl::downstream::softmax::objective_and_gradient;
use pearl::frl::{fit_kpca, fit_pca, KernelSpec};
use pearl::loss::SurrogateLoss;
use pearl::rng::{seeded_rng, standard_normal};
use pearl::weights::objective;
use proptest::prelude::*;
use rand::Rng;

const LOSSES: [SurrogateLoss; 3] = [SurrogateLoss::SquaredError, SurrogateLoss::CrossEntropy, SurrogateLoss::Hinge];

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-300)
}

/// Analytic `∂F/∂w_j` from the loss gradient with respect to predictions.
fn weight_gradient(blocks: &[PredictionBlock], truth: &Targets, loss: SurrogateLoss, w: &[f64]) -> Vec<f64> {
    let mix = PredictionBlock::weighted_sum(blocks, w).unwrap();
    let g = loss.gradient(truth, &mix).unwrap();
    blocks.iter().map(|b| g.dot(b.values())).collect()
}

fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut up = x.to_vec();
            let mut dn = x.to_vec();
            up[i] += h;
            dn[i] -= h;
            (f(&up) - f(&dn)) / (2.0 * h)
        })
        .collect()
}

#[test]
fn loss_gradients_match_finite_differences() {
    for loss in LOSSES {
        for seed in 0..10 {
            let (blocks, truth) = random_instance(loss, 100 + seed, 40, 4);
            let mut rng = seeded_rng(seed);
            let raw: Vec<f64> = (0..4).map(|_| rng.random_range(0.1..1.0)).collect();
            let s: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|v| v / s).collect();
            let an = weight_gradient(&blocks, &truth, loss, &w);
            let fd = central_difference(|x| objective(&blocks, &truth, loss, x).unwrap(), &w, 1e-6);
            let e = rel_err(&an, &fd);
            assert!(e < 1e-5, "{loss} seed {seed}: rel err {e:e}");
        }
    }
}

#[test]
fn per_entry_gradients_for_single_column_losses() {
    let (blocks, truth) = random_instance(SurrogateLoss::SquaredError, 3, 25, 1);
    let v = blocks[0].column().to_vec();
    let f = |x: &[f64]| SurrogateLoss::SquaredError.value(&truth, &PredictionBlock::regression(x.to_vec()).unwrap()).unwrap();
    let an = SurrogateLoss::SquaredError.gradient(&truth, &blocks[0]).unwrap();
    assert!(rel_err(an.as_slice(), &central_difference(f, &v, 1e-6)) < 1e-5);

    let (blocks, truth) = random_instance(SurrogateLoss::Hinge, 4, 25, 1);
    let v = blocks[0].column().to_vec();
    let f = |x: &[f64]| SurrogateLoss::Hinge.value(&truth, &PredictionBlock::margins(x.to_vec()).unwrap()).unwrap();
    let an = SurrogateLoss::Hinge.gradient(&truth, &blocks[0]).unwrap();
    assert!(rel_err(an.as_slice(), &central_difference(f, &v, 1e-7)) < 1e-5);
}

#[test]
fn softmax_objective_gradient_matches_finite_differences() {
    let mut rng = seeded_rng(21);
    let z = normal_matrix(&mut rng, 30, 3);
    let labels: Vec<usize> = (0..30).map(|i| i % 4).collect();
    let w = normal_matrix(&mut rng, 4, 4) * 0.5;
    let (_, an) = objective_and_gradient(&z, &labels, &w, 1e-3);
    let fd = central_difference(
        |x| objective_and_gradient(&z, &labels, &DMatrix::from_column_slice(4, 4, x), 1e-3).0,
        w.as_slice(),
        1e-6,
    );
    assert!(rel_err(an.as_slice(), &fd) < 1e-5);
}

#[test]
fn weight_objective_is_convex() {
    // first-order condition F(b) >= F(a) + <grad F(a), b - a> on random simplex pairs
    for loss in LOSSES {
        let (blocks, truth) = random_instance(loss, 77, 60, 5);
        let mut rng = seeded_rng(5);
        let mut draw = || {
            let raw: Vec<f64> = (0..5).map(|_| rng.random_range(0.01..1.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / s).collect::<Vec<f64>>()
        };
        for _ in 0..200 {
            let (a, b) = (draw(), draw());
            let fa = objective(&blocks, &truth, loss, &a).unwrap();
            let fb = objective(&blocks, &truth, loss, &b).unwrap();
            let g = weight_gradient(&blocks, &truth, loss, &a);
            let lin: f64 = g.iter().zip(a.iter().zip(&b)).map(|(g, (a, b))| g * (b - a)).sum();
            assert!(fb >= fa + lin - 1e-12, "{loss}: {fb} < {fa} + {lin}");
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let fm = objective(&blocks, &truth, loss, &mid).unwrap();
            assert!(fm <= 0.5 * (fa + fb) + 1e-12);
        }
    }
}

#[test]
fn squared_error_hessian_is_psd() {
    let (blocks, _) = random_instance(SurrogateLoss::SquaredError, 9, 50, 6);
    let p = DMatrix::from_fn(50, 6, |i, j| blocks[j].column()[i]);
    let h = p.transpose() * &p * (2.0 / 50.0);
    let eig = SymmetricEigen::new(h);
    assert!(eig.eigenvalues.min() >= -1e-10);
}

fn dataset(seed: u64, n: usize, d: usize) -> UnlabeledDataset {
    let mut rng = seeded_rng(seed);
    // correlated columns with distinct scales
    let mix = normal_matrix(&mut rng, d, d);
    UnlabeledDataset::new(normal_matrix(&mut rng, n, d) * mix).unwrap()
}

fn max_abs_diff_up_to_sign(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (0..a.ncols())
        .map(|c| {
            let plus = (a.column(c) - b.column(c)).amax();
            let minus = (a.column(c) + b.column(c)).amax();
            plus.min(minus)
        })
        .fold(0.0, f64::max)
}

#[test]
fn pca_scores_match_covariance_eigenvectors() {
    let data = dataset(1, 200, 5);
    let (model, _) = fit_pca(&data, 2).unwrap();
    let x = data.features();
    let means = x.row_mean();
    let centered = DMatrix::from_fn(200, 5, |i, j| x[(i, j)] - means[j]);
    let cov = centered.transpose() * &centered / 199.0;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..5).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let basis = DMatrix::from_fn(5, 2, |r, c| eig.eigenvectors[(r, order[c])]);
    let oracle = &centered * basis;
    let scores = model.transform(x).unwrap();
    assert!(max_abs_diff_up_to_sign(&scores, &oracle) < 1e-8);
}

#[test]
fn linear_kpca_equals_pca_on_twenty_datasets() {
    for seed in 0..20 {
        let d = 2 + (seed as usize % 4);
        let data = dataset(seed, 60, d);
        let p = 1 + (seed as usize % d.min(3));
        let (pca, _) = fit_pca(&data, p).unwrap();
        let (kpca, _) = fit_kpca(&data, KernelSpec::Linear, p).unwrap();
        let mut rng = seeded_rng(1000 + seed);
        let fresh = normal_matrix(&mut rng, 15, d);
        for rows in [data.features().clone(), fresh] {
            let a = pca.transform(&rows).unwrap();
            let b = kpca.transform(&rows).unwrap();
            let diff = max_abs_diff_up_to_sign(&a, &b);
            assert!(diff < 1e-6, "seed {seed}: {diff:e}");
        }
    }
}

#[test]
fn pca_orthonormal_and_reconstruction_monotone() {
    for seed in 0..5 {
        let data = dataset(50 + seed, 120, 6);
        let mut last = f64::INFINITY;
        for p in 1..=5 {
            let (model, _) = fit_pca(&data, p).unwrap();
            let l = model.loadings();
            let gram = l.transpose() * l;
            assert!((gram - DMatrix::identity(p, p)).amax() <= 1e-8);
            let x = data.features();
            let scores = model.transform(x).unwrap();
            let recon = scores * l.transpose();
            let means = model.means();
            let err: f64 = (0..x.nrows())
                .map(|i| (0..6).map(|j| (x[(i, j)] - means[j] - recon[(i, j)]).powi(2)).sum::<f64>())
                .sum();
            assert!(err <= last + 1e-9, "p={p}: {err} > {last}");
            last = err;
        }
    }
}

#[test]
fn ridge_matches_augmented_least_squares() {
    let mut rng = seeded_rng(8);
    let (n, p) = (40, 4);
    let z = normal_matrix(&mut rng, n, p);
    let y: Vec<f64> = (0..n).map(|i| 1.5 + z[(i, 0)] - 2.0 * z[(i, 2)] + 0.1 * standard_normal(&mut rng)).collect();
    for lambda in [0.0f64, 1e-6, 0.5, 10.0] {
        // unpenalized intercept column, sqrt(λ)-scaled identity rows for the slopes
        let a = DMatrix::from_fn(n + p, p + 1, |i, j| match (i < n, j) {
            (true, 0) => 1.0,
            (true, j) => z[(i, j - 1)],
            (false, 0) => 0.0,
            (false, j) => if i - n == j - 1 { lambda.sqrt() } else { 0.0 },
        });
        let mut b = DMatrix::zeros(n + p, 1);
        for i in 0..n {
            b[(i, 0)] = y[i];
        }
        let sol = a.svd(true, true).solve(&b, 1e-14).unwrap();
        let model = fit_ridge(&z, &y, lambda).unwrap();
        assert!((model.intercept() - sol[(0, 0)]).abs() < 1e-8, "lambda {lambda}");
        for j in 0..p {
            assert!((model.coef()[j] - sol[(j + 1, 0)]).abs() < 1e-8, "lambda {lambda} coef {j}");
        }
    }
}

#[test]
fn probability_blocks_keep_kind_through_mixing() {
    let (blocks, _) = random_instance(SurrogateLoss::CrossEntropy, 2, 10, 3);
    let mix = PredictionBlock::weighted_sum(&blocks, &[0.2, 0.3, 0.5]).unwrap();
    assert_eq!(mix.kind(), TaskKind::Classification);
    for row in mix.values().row_iter() {
        assert!((row.sum() - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kpca_gram_matrices_are_psd(seed in 0u64..1000, which in 0usize..4) {
        let data = dataset(seed, 25, 3);
        let kernel = [
            KernelSpec::Linear,
            KernelSpec::Gaussian { gamma: 0.3 },
            KernelSpec::Polynomial { degree: 2, gamma: 0.5, coef0: 1.0 },
            KernelSpec::Cosine,
        ][which];
        let rows: Vec<Vec<f64>> = data.features().row_iter().map(|r| r.iter().copied().collect()).collect();
        let k = pearl::frl::kpca::kernel_matrix(&kernel, &rows).unwrap();
        let (kc, _, _) = pearl::frl::kpca::center_kernel(&k);
        let eig = SymmetricEigen::new(kc);
        prop_assert!(eig.eigenvalues.min() >= -1e-9 * eig.eigenvalues.amax().max(1.0));
    }
}
