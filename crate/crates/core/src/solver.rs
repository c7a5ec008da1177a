//! Sparse recovery of `α` with `y ≈ Dα`.
//!
//! Three solvers share one contract: orthogonal matching pursuit (greedy,
//! default), ISTA and FISTA for the ℓ1-penalized least-squares objective
//! `½‖y − Dα‖² + λ‖α‖₁`. [`brute_force_sparse`] enumerates every small support
//! and exists as a test oracle.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{self, least_squares, Matrix};

/// Columns whose norm falls below this are treated as zero.
pub const ZERO_COLUMN_NORM: f64 = 1e-12;

/// Default OMP residual stop, relative to `‖y‖₂`.
pub const DEFAULT_OMP_RELATIVE_TOLERANCE: f64 = 1e-6;
/// Default ℓ1 weight, relative to `max|Dᵀy|`.
pub const DEFAULT_LAMBDA_FRACTION: f64 = 0.1;
/// Default relative objective change that stops ISTA/FISTA.
pub const DEFAULT_L1_TOLERANCE: f64 = 1e-8;

const POWER_ITERATIONS: usize = 1000;
const POWER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix has no rows or no columns")]
    EmptyMatrix,
    #[error("column {0} has zero norm")]
    ZeroColumn(usize),
    #[error("column {0} is not unit-norm")]
    NotNormalized(usize),
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("brute-force oracle is limited to n <= 20 and k <= 3 (got n = {n}, k = {k})")]
    OracleTooLarge { n: usize, k: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Omp,
    Ista,
    Fista,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Omp => "omp",
            Method::Ista => "ista",
            Method::Fista => "fista",
        }
    }
}

impl core::str::FromStr for Method {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "omp" => Ok(Method::Omp),
            "ista" => Ok(Method::Ista),
            "fista" => Ok(Method::Fista),
            _ => Err(SolverError::InvalidConfig("method must be one of omp, ista, fista")),
        }
    }
}

impl core::fmt::Display for Method {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Solver settings.
///
/// `lambda` and `tolerance` default per problem when `None`: λ becomes
/// `0.1·max|Dᵀy|`; the tolerance becomes `1e-6·‖y‖₂` for OMP and a relative
/// objective change of `1e-8` for ISTA/FISTA.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub max_sparsity: usize,
    pub lambda: Option<f64>,
    pub max_iterations: usize,
    pub tolerance: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Omp,
            max_sparsity: 10,
            lambda: None,
            max_iterations: 500,
            tolerance: None,
        }
    }
}

impl SolverConfig {
    pub fn omp(max_sparsity: usize) -> Self {
        SolverConfig { method: Method::Omp, max_sparsity, ..Default::default() }
    }

    pub fn l1(method: Method, lambda: f64, max_iterations: usize, tolerance: f64) -> Self {
        SolverConfig {
            method,
            lambda: Some(lambda),
            max_iterations,
            tolerance: Some(tolerance),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.max_sparsity == 0 {
            return Err(SolverError::InvalidConfig("max_sparsity must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(SolverError::InvalidConfig("max_iterations must be positive"));
        }
        if let Some(l) = self.lambda {
            if !(l.is_finite() && l >= 0.0) {
                return Err(SolverError::InvalidConfig("lambda must be finite and nonnegative"));
            }
        }
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t >= 0.0) {
                return Err(SolverError::InvalidConfig("tolerance must be finite and nonnegative"));
            }
        }
        Ok(())
    }
}

/// A dictionary with unit-norm columns and the norms they had before scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    matrix: Matrix,
    column_norms: Vec<f64>,
}

/// Scales every column of `raw` to unit Euclidean norm.
pub fn normalize_columns(raw: &Matrix) -> Result<DesignMatrix, SolverError> {
    if raw.rows() == 0 || raw.cols() == 0 {
        return Err(SolverError::EmptyMatrix);
    }
    if raw.as_column_major().iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite);
    }
    let mut matrix = raw.clone();
    let mut column_norms = Vec::with_capacity(raw.cols());
    for j in 0..raw.cols() {
        let norm = linalg::norm2(raw.column(j));
        if norm < ZERO_COLUMN_NORM {
            return Err(SolverError::ZeroColumn(j));
        }
        matrix.column_mut(j).iter_mut().for_each(|v| *v /= norm);
        column_norms.push(norm);
    }
    Ok(DesignMatrix { matrix, column_norms })
}

impl DesignMatrix {
    /// Reassembles a design matrix from already-normalized columns, e.g. when
    /// loading a saved model.
    pub fn from_normalized(matrix: Matrix, column_norms: Vec<f64>) -> Result<Self, SolverError> {
        if matrix.rows() == 0 || matrix.cols() == 0 {
            return Err(SolverError::EmptyMatrix);
        }
        if column_norms.len() != matrix.cols() {
            return Err(SolverError::DimensionMismatch { expected: matrix.cols(), found: column_norms.len() });
        }
        for j in 0..matrix.cols() {
            if !(column_norms[j].is_finite() && column_norms[j] >= ZERO_COLUMN_NORM) {
                return Err(SolverError::ZeroColumn(j));
            }
            if libm::fabs(linalg::norm2(matrix.column(j)) - 1.0) > 1e-12 {
                return Err(SolverError::NotNormalized(j));
            }
        }
        Ok(DesignMatrix { matrix, column_norms })
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn column(&self, j: usize) -> &[f64] {
        self.matrix.column(j)
    }

    pub fn column_norms(&self) -> &[f64] {
        &self.column_norms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveDiagnostics {
    /// An OMP least-squares subproblem was rank-deficient and was solved in
    /// the minimum-norm sense.
    pub rank_deficient: bool,
    /// `false` when ISTA/FISTA used the full iteration budget without meeting
    /// the tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseCode {
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    pub iterations_used: usize,
    pub diagnostics: SolveDiagnostics,
}

impl SparseCode {
    /// Indices of the nonzero coefficients, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(j, _)| j)
            .collect()
    }
}

/// One OMP iteration, reported to the observer of [`solve_omp_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmpStep {
    pub iteration: usize,
    pub selected: usize,
    pub residual_norm: f64,
}

/// `‖y − Dα‖₂`
pub fn residual_norm(d: &DesignMatrix, y: &[f64], alpha: &[f64]) -> Result<f64, SolverError> {
    check_y(d, y)?;
    if alpha.len() != d.cols() {
        return Err(SolverError::DimensionMismatch { expected: d.cols(), found: alpha.len() });
    }
    Ok(residual_unchecked(d, y, alpha))
}

fn residual_unchecked(d: &DesignMatrix, y: &[f64], alpha: &[f64]) -> f64 {
    let fit = d.matrix.mul_vec(alpha);
    libm::sqrt(y.iter().zip(&fit).map(|(a, b)| (a - b) * (a - b)).sum())
}

fn check_y(d: &DesignMatrix, y: &[f64]) -> Result<(), SolverError> {
    if y.len() != d.rows() {
        return Err(SolverError::DimensionMismatch { expected: d.rows(), found: y.len() });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite);
    }
    Ok(())
}

/// Runs the solver selected by `cfg.method`.
pub fn solve(d: &DesignMatrix, y: &[f64], cfg: &SolverConfig) -> Result<SparseCode, SolverError> {
    match cfg.method {
        Method::Omp => solve_omp(d, y, cfg),
        Method::Ista | Method::Fista => solve_l1(d, y, cfg),
    }
}

pub fn solve_omp(d: &DesignMatrix, y: &[f64], cfg: &SolverConfig) -> Result<SparseCode, SolverError> {
    solve_omp_with(d, y, cfg, |_| {})
}

/// Orthogonal matching pursuit with a per-iteration observer.
///
/// Selection picks the column with the largest `|⟨d_j, r⟩|` not yet selected,
/// ties going to the lowest index; coefficients are refit by least squares on
/// the whole support after every selection. The support size is capped at
/// `min(max_sparsity, m, n)`.
pub fn solve_omp_with(
    d: &DesignMatrix,
    y: &[f64],
    cfg: &SolverConfig,
    mut observer: impl FnMut(&OmpStep),
) -> Result<SparseCode, SolverError> {
    cfg.validate()?;
    check_y(d, y)?;
    let (m, n) = (d.rows(), d.cols());
    let y_norm = linalg::norm2(y);
    let tolerance = cfg.tolerance.unwrap_or(DEFAULT_OMP_RELATIVE_TOLERANCE * y_norm);
    let limit = cfg.max_sparsity.min(m).min(n);
    // Correlations at roundoff level carry no direction worth selecting.
    let negligible = 64.0 * f64::EPSILON * y_norm;

    let mut selected = vec![false; n];
    let mut support: Vec<usize> = Vec::with_capacity(limit);
    let mut coefs: Vec<f64> = Vec::new();
    let mut residual = y.to_vec();
    let mut res_norm = y_norm;
    let mut rank_deficient = false;

    while support.len() < limit && res_norm > tolerance {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if selected[j] {
                continue;
            }
            let c = libm::fabs(linalg::dot(d.column(j), &residual));
            if best.is_none_or(|(_, b)| c > b) {
                best = Some((j, c));
            }
        }
        let Some((j, c)) = best else { break };
        if c <= negligible {
            break;
        }
        selected[j] = true;
        support.push(j);
        let ls = least_squares(&d.matrix, &support, y);
        rank_deficient |= ls.is_rank_deficient();
        coefs = ls.coefficients;

        residual.copy_from_slice(y);
        for (&col, &c) in support.iter().zip(&coefs) {
            linalg::axpy(-c, d.column(col), &mut residual);
        }
        res_norm = linalg::norm2(&residual);
        observer(&OmpStep { iteration: support.len(), selected: j, residual_norm: res_norm });
    }

    let mut coefficients = vec![0.0; n];
    for (&col, &c) in support.iter().zip(&coefs) {
        coefficients[col] = c;
    }
    let residual_norm = residual_unchecked(d, y, &coefficients);
    Ok(SparseCode {
        coefficients,
        residual_norm,
        iterations_used: support.len(),
        diagnostics: SolveDiagnostics { rank_deficient, converged: true },
    })
}

/// Element-wise `sign(xᵢ)·max(|xᵢ| − threshold, 0)`.
pub fn soft_threshold(x: &[f64], threshold: f64) -> Vec<f64> {
    x.iter().map(|&v| soft_threshold_scalar(v, threshold)).collect()
}

pub fn soft_threshold_scalar(x: f64, threshold: f64) -> f64 {
    if x > threshold {
        x - threshold
    } else if x < -threshold {
        x + threshold
    } else {
        0.0
    }
}

/// `½‖y − Dα‖₂² + λ‖α‖₁`
pub fn l1_objective(d: &DesignMatrix, y: &[f64], alpha: &[f64], lambda: f64) -> f64 {
    let r = residual_unchecked(d, y, alpha);
    0.5 * r * r + lambda * alpha.iter().map(|a| libm::fabs(*a)).sum::<f64>()
}

/// The λ that [`solve_l1`] uses for this problem.
pub fn resolved_lambda(d: &DesignMatrix, y: &[f64], cfg: &SolverConfig) -> f64 {
    cfg.lambda.unwrap_or_else(|| {
        let max_corr = d.matrix.tr_mul_vec(y).iter().fold(0.0_f64, |acc, c| acc.max(libm::fabs(*c)));
        DEFAULT_LAMBDA_FRACTION * max_corr
    })
}

pub fn solve_l1(d: &DesignMatrix, y: &[f64], cfg: &SolverConfig) -> Result<SparseCode, SolverError> {
    solve_l1_with(d, y, cfg, |_, _| {})
}

/// ISTA or FISTA (per `cfg.method`) with step `1/L`, `L` the largest
/// eigenvalue of `DᵀD`. The observer receives `(iteration, objective)` after
/// every step.
pub fn solve_l1_with(
    d: &DesignMatrix,
    y: &[f64],
    cfg: &SolverConfig,
    mut observer: impl FnMut(usize, f64),
) -> Result<SparseCode, SolverError> {
    cfg.validate()?;
    check_y(d, y)?;
    let n = d.cols();
    let lambda = resolved_lambda(d, y, cfg);
    let tolerance = cfg.tolerance.unwrap_or(DEFAULT_L1_TOLERANCE);
    // Unit columns put every diagonal entry of DᵀD at 1, so L >= 1.
    let lipschitz = linalg::largest_gram_eigenvalue(&d.matrix, POWER_ITERATIONS, POWER_TOLERANCE).max(1.0);
    let step = 1.0 / lipschitz;
    let accelerate = cfg.method == Method::Fista;

    let mut x = vec![0.0; n];
    let mut z = x.clone();
    let mut theta = 1.0_f64;
    let mut previous = l1_objective(d, y, &x, lambda);
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=cfg.max_iterations {
        iterations = it;
        let base = if accelerate { &z } else { &x };
        let fit = d.matrix.mul_vec(base);
        let r: Vec<f64> = fit.iter().zip(y).map(|(f, yi)| f - yi).collect();
        let grad = d.matrix.tr_mul_vec(&r);
        let next: Vec<f64> = base
            .iter()
            .zip(&grad)
            .map(|(b, g)| soft_threshold_scalar(b - step * g, lambda * step))
            .collect();

        if accelerate {
            let theta_next = (1.0 + libm::sqrt(1.0 + 4.0 * theta * theta)) / 2.0;
            let momentum = (theta - 1.0) / theta_next;
            for ((zi, ni), xi) in z.iter_mut().zip(&next).zip(&x) {
                *zi = ni + momentum * (ni - xi);
            }
            theta = theta_next;
        }
        x = next;

        let objective = l1_objective(d, y, &x, lambda);
        observer(it, objective);
        let change = libm::fabs(previous - objective);
        let scale = libm::fabs(previous);
        previous = objective;
        if change <= tolerance * scale {
            converged = true;
            break;
        }
    }

    let residual_norm = residual_unchecked(d, y, &x);
    Ok(SparseCode {
        coefficients: x,
        residual_norm,
        iterations_used: iterations,
        diagnostics: SolveDiagnostics { rank_deficient: false, converged },
    })
}

/// Exact best approximation of `y` using at most `k` columns.
///
/// Every support of size `0..=k` is fit by least squares; the smallest
/// residual wins and ties go to the lexicographically smallest support.
/// Limited to `n <= 20` and `k <= 3`.
pub fn brute_force_sparse(d: &DesignMatrix, y: &[f64], k: usize) -> Result<SparseCode, SolverError> {
    let n = d.cols();
    if n > 20 || k > 3 || k == 0 {
        return Err(SolverError::OracleTooLarge { n, k });
    }
    check_y(d, y)?;
    let k = k.min(n);

    let mut best_support: Vec<usize> = Vec::new();
    let mut best_coefs: Vec<f64> = Vec::new();
    let mut best_residual = linalg::norm2(y);
    let mut rank_deficient = false;

    let mut candidate = vec![0.0; n];
    for size in 1..=k {
        let mut support: Vec<usize> = (0..size).collect();
        loop {
            let ls = least_squares(&d.matrix, &support, y);
            candidate.iter_mut().for_each(|c| *c = 0.0);
            for (&j, &c) in support.iter().zip(&ls.coefficients) {
                candidate[j] = c;
            }
            let r = residual_unchecked(d, y, &candidate);
            if r < best_residual || (r == best_residual && support < best_support) {
                best_residual = r;
                best_support.clone_from(&support);
                best_coefs = ls.coefficients.clone();
                rank_deficient = ls.is_rank_deficient();
            }
            if !next_combination(&mut support, n) {
                break;
            }
        }
    }

    let mut coefficients = vec![0.0; n];
    for (&j, &c) in best_support.iter().zip(&best_coefs) {
        coefficients[j] = c;
    }
    Ok(SparseCode {
        coefficients,
        residual_norm: best_residual,
        iterations_used: 0,
        diagnostics: SolveDiagnostics { rank_deficient, converged: true },
    })
}

/// Advances `c` to the next `|c|`-subset of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
