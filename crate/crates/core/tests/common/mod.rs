#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sparsenilm_core::solver::{normalize_columns, DesignMatrix};
use sparsenilm_core::Matrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gaussian `m × n` dictionary with unit-norm columns.
pub fn gaussian_design(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DesignMatrix {
    let data: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    normalize_columns(&Matrix::from_column_major(m, n, data).unwrap()).unwrap()
}

/// `k` distinct indices in `0..n` carrying standard Gaussian coefficients.
pub fn sparse_truth(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<f64> {
    let mut alpha = vec![0.0; n];
    let mut placed = 0;
    while placed < k {
        let j = rng.random_range(0..n);
        if alpha[j] == 0.0 {
            alpha[j] = rng.sample(StandardNormal);
            placed += 1;
        }
    }
    alpha
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.sample(StandardNormal)).collect()
}

/// Least squares through the normal equations and Gaussian elimination with
/// partial pivoting; independent of the library's SVD path.
pub fn normal_equations_lstsq(d: &DesignMatrix, y: &[f64]) -> Vec<f64> {
    let n = d.cols();
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = d.column(i).iter().zip(d.column(j)).map(|(x, y)| x * y).sum();
        }
        a[i][n] = d.column(i).iter().zip(y).map(|(x, y)| x * y).sum();
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).unwrap();
        a.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..=n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (a[i][n] - s) / a[i][i];
    }
    x
}
