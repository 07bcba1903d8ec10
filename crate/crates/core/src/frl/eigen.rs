//! Leading eigenpairs of dense symmetric matrices.
//!
//! Small matrices go through a full symmetric eigendecomposition. Larger ones use
//! Lanczos with full reorthogonalization, which only needs matrix-vector products
//! and converges quickly to the extreme end of the spectrum.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::rng::{seeded_rng, standard_normal};

const DENSE_LIMIT: usize = 200;
const RESIDUAL_TOL: f64 = 1e-12;

/// Largest `k` eigenvalues (descending) with unit eigenvectors as columns.
pub(crate) fn top_eigenpairs(a: &DMatrix<f64>, k: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let k = k.min(n);
    if n <= DENSE_LIMIT {
        dense_top(a, k)
    } else {
        lanczos_top(a, k)
    }
}

fn sorted_desc(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    idx
}

fn dense_top(a: &DMatrix<f64>, k: usize) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    let order = sorted_desc(eig.eigenvalues.as_slice());
    let vals = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(a.nrows(), k, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

fn orthogonalize(w: &mut DVector<f64>, basis: &[DVector<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = q.dot(w);
            w.axpy(-c, q, 1.0);
        }
    }
}

fn lanczos_top(a: &DMatrix<f64>, k: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let anorm = a.norm().max(f64::MIN_POSITIVE);
    let mut rng = seeded_rng(0x1A2C_2005 ^ n as u64);
    let mut random_unit = |basis: &[DVector<f64>]| -> Option<DVector<f64>> {
        let mut v = DVector::from_fn(n, |_, _| standard_normal(&mut rng));
        orthogonalize(&mut v, basis);
        let norm = v.norm();
        (norm > 1e-8 * (n as f64).sqrt()).then(|| v / norm)
    };

    let mut basis: Vec<DVector<f64>> = vec![random_unit(&[]).expect("nonzero start vector")];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut next_check = (2 * k + 20).min(n);
    let mut w = DVector::zeros(n);

    loop {
        let j = alpha.len();
        w.gemv(1.0, a, &basis[j], 0.0);
        let aj = basis[j].dot(&w);
        alpha.push(aj);
        orthogonalize(&mut w, &basis);
        let b = w.norm();
        let steps = j + 1;
        let mut exhausted = steps == n;
        let mut coupling = b;
        if !exhausted {
            if b <= 1e-13 * anorm {
                // invariant subspace reached; continue from a fresh direction
                coupling = 0.0;
                match random_unit(&basis) {
                    Some(v) => basis.push(v),
                    None => exhausted = true,
                }
            } else {
                basis.push(&w / b);
            }
        }
        beta.push(coupling);

        if exhausted || coupling == 0.0 || steps >= next_check {
            let m = alpha.len();
            let t = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let order = sorted_desc(eig.eigenvalues.as_slice());
            let kk = k.min(m);
            let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
            let last = beta[m - 1];
            let converged = order[..kk]
                .iter()
                .all(|&i| (last * eig.eigenvectors[(m - 1, i)]).abs() <= RESIDUAL_TOL * scale);
            if exhausted || (converged && kk == k) {
                let vals = order[..kk].iter().map(|&i| eig.eigenvalues[i]).collect();
                let mut vecs = DMatrix::zeros(n, kk);
                for (c, &i) in order[..kk].iter().enumerate() {
                    let mut col = DVector::zeros(n);
                    for (r, q) in basis.iter().take(m).enumerate() {
                        col.axpy(eig.eigenvectors[(r, i)], q, 1.0);
                    }
                    let norm = col.norm();
                    vecs.set_column(c, &(col / norm));
                }
                return (vals, vecs);
            }
            next_check = (steps + 10).min(n);
        }
    }
}
