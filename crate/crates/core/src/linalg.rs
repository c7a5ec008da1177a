//! Small dense linear algebra: a column-major matrix, minimum-norm least
//! squares on a column subset (one-sided Jacobi SVD), and the spectral norm
//! of `AᵀA` by power iteration.

use alloc::vec;
use alloc::vec::Vec;

use crate::solver::SolverError;

/// Dense real matrix stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from column-major storage.
    pub fn from_column_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, SolverError> {
        if data.len() != rows * cols {
            return Err(SolverError::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix whose columns are the given slices.
    pub fn from_columns<C: AsRef<[f64]>>(columns: &[C]) -> Result<Self, SolverError> {
        let rows = columns.first().map_or(0, |c| c.as_ref().len());
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(SolverError::DimensionMismatch { expected: rows, found: c.len() });
            }
            data.extend_from_slice(c);
        }
        Ok(Matrix { rows, cols: columns.len(), data })
    }

    /// Builds a matrix from row slices.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, SolverError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Matrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(SolverError::DimensionMismatch { expected: cols, found: r.len() });
            }
            for (j, &v) in r.iter().enumerate() {
                m.data[j * m.rows + i] = v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn as_column_major(&self) -> &[f64] {
        &self.data
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.column(j), &mut out);
            }
        }
        out
    }

    /// `Aᵀ y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        (0..self.cols).map(|j| dot(self.column(j), y)).collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Solution of a least-squares subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    /// One coefficient per selected column, in selection order.
    pub coefficients: Vec<f64>,
    /// Numerical rank of the selected columns.
    pub rank: usize,
}

impl LeastSquares {
    pub fn is_rank_deficient(&self) -> bool {
        self.rank < self.coefficients.len()
    }
}

/// Minimum-norm least-squares fit of `y` by the columns `cols` of `a`.
///
/// Singular values below `max(m, k) · ε · σ_max` are treated as zero, so a
/// rank-deficient selection still returns the pseudo-inverse solution.
pub fn least_squares(a: &Matrix, cols: &[usize], y: &[f64]) -> LeastSquares {
    let m = a.rows();
    let k = cols.len();
    if k == 0 {
        return LeastSquares { coefficients: Vec::new(), rank: 0 };
    }
    // u holds the working columns, v accumulates the right rotations.
    let mut u: Vec<f64> = Vec::with_capacity(m * k);
    for &j in cols {
        u.extend_from_slice(a.column(j));
    }
    let mut v = Matrix::identity(k).data;

    const MAX_SWEEPS: usize = 80;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let (up, uq) = pair_mut(&mut u, m, p, q);
                let alpha = dot(up, up);
                let beta = dot(uq, uq);
                let gamma = dot(up, uq);
                if gamma == 0.0 || libm::fabs(gamma) <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (libm::fabs(zeta) + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(up, uq, c, s);
                let (vp, vq) = pair_mut(&mut v, k, p, q);
                rotate(vp, vq, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = (0..k).map(|j| norm2(&u[j * m..(j + 1) * m])).collect();
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let threshold = (m.max(k) as f64) * f64::EPSILON * sigma_max;

    let mut coefficients = vec![0.0; k];
    let mut rank = 0;
    for j in 0..k {
        if sigma[j] <= threshold || sigma[j] == 0.0 {
            continue;
        }
        rank += 1;
        let w = dot(&u[j * m..(j + 1) * m], y) / (sigma[j] * sigma[j]);
        axpy(w, &v[j * k..(j + 1) * k], &mut coefficients);
    }
    LeastSquares { coefficients, rank }
}

fn pair_mut(data: &mut [f64], len: usize, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let (head, tail) = data.split_at_mut(q * len);
    (&mut head[p * len..(p + 1) * len], &mut tail[..len])
}

fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Largest eigenvalue of `AᵀA` by power iteration.
///
/// The start vector is a fixed low-discrepancy sequence, so the result is
/// deterministic and unlikely to be orthogonal to the top eigenvector.
pub fn largest_gram_eigenvalue(a: &Matrix, max_iterations: usize, tolerance: f64) -> f64 {
    let n = a.cols();
    if n == 0 || a.rows() == 0 {
        return 0.0;
    }
    let mut x: Vec<f64> = (0..n).map(|j| 1.0 + frac((j as f64 + 1.0) * 0.618_033_988_749_894_9)).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);

    let mut estimate = 0.0;
    for _ in 0..max_iterations {
        let ax = a.mul_vec(&x);
        let mut next = a.tr_mul_vec(&ax);
        let rayleigh = dot(&ax, &ax);
        let nn = norm2(&next);
        if nn == 0.0 {
            return rayleigh;
        }
        next.iter_mut().for_each(|v| *v /= nn);
        x = next;
        let converged = libm::fabs(rayleigh - estimate) <= tolerance * rayleigh;
        estimate = rayleigh;
        if converged {
            break;
        }
    }
    estimate
}

fn frac(x: f64) -> f64 {
    x - libm::floor(x)
}
