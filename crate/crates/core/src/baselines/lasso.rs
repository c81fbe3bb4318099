//! L1-penalised least squares by cyclic coordinate descent.
//!
//! Columns are standardised (zero mean, unit population variance) and the
//! response centred, then
//!
//! ```text
//! (1 / 2n) ||y_c - Z beta||^2 + lambda ||beta||_1
//! ```
//!
//! is minimised over the standardised coefficients `beta`. The solver works
//! on the covariance form `Q = Z'Z / n`, `c = Z'y_c / n`, keeping the
//! residual correlation `r = c - Q beta` up to date, so a sweep costs
//! `O(p^2)` regardless of `n`. Coefficients are reported both on the
//! standardised scale and mapped back to the original column units.

use rand::seq::SliceRandom;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::Stream;

use super::rank_descending;

pub const DEFAULT_N_LAMBDAS: usize = 30;
pub const DEFAULT_N_FOLDS: usize = 5;
/// Smallest lambda on the cross-validation path, relative to `lambda_max`.
pub const PATH_RATIO: f64 = 1e-3;
/// Convergence tolerance along the path, in units of the response's
/// standard deviation.
pub const PATH_TOL: f64 = 1e-4;
const PATH_MAX_SWEEPS: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct LassoFit {
    /// Coefficients in original column units.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Coefficients of the standardised columns (the penalised quantity).
    pub standardized: Vec<f64>,
    pub lambda: f64,
    pub n_iterations: usize,
    pub converged: bool,
    /// Objective value after each sweep.
    pub objective_trace: Vec<f64>,
}

impl LassoFit {
    pub fn support(&self) -> Vec<usize> {
        (0..self.standardized.len())
            .filter(|&j| self.standardized[j] != 0.0)
            .collect()
    }
}

#[inline]
pub fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

/// Sums over a set of rows of the (globally centred) data.
#[derive(Clone, Debug)]
struct SuffStats {
    n: usize,
    sx: Vec<f64>,
    /// Row-major `p x p`.
    sxx: Vec<f64>,
    sxy: Vec<f64>,
    sy: f64,
    syy: f64,
}

impl SuffStats {
    fn from_rows(x: &[Vec<f64>], y: &[f64], rows: &[usize]) -> Self {
        let p = x.len();
        let cols: Vec<Vec<f64>> = x
            .iter()
            .map(|c| rows.iter().map(|&i| c[i]).collect())
            .collect();
        let ys: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
        let mut sxx = vec![0.0; p * p];
        for j in 0..p {
            for k in j..p {
                let v = dot(&cols[j], &cols[k]);
                sxx[j * p + k] = v;
                sxx[k * p + j] = v;
            }
        }
        SuffStats {
            n: rows.len(),
            sx: cols.iter().map(|c| c.iter().sum()).collect(),
            sxx,
            sxy: cols.iter().map(|c| dot(c, &ys)).collect(),
            sy: ys.iter().sum(),
            syy: dot(&ys, &ys),
        }
    }

    fn minus(&self, other: &SuffStats) -> SuffStats {
        let sub = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u - v).collect();
        SuffStats {
            n: self.n - other.n,
            sx: sub(&self.sx, &other.sx),
            sxx: sub(&self.sxx, &other.sxx),
            sxy: sub(&self.sxy, &other.sxy),
            sy: self.sy - other.sy,
            syy: self.syy - other.syy,
        }
    }
}

/// Standardised least-squares problem in covariance form.
#[derive(Clone, Debug)]
struct Problem {
    p: usize,
    /// Means of the (centred) columns and response on these rows.
    x_mean: Vec<f64>,
    y_mean: f64,
    /// Column standard deviations; zero marks a constant column.
    scale: Vec<f64>,
    q: Vec<f64>,
    c: Vec<f64>,
    y_var: f64,
}

impl Problem {
    fn new(stats: &SuffStats) -> Self {
        let p = stats.sx.len();
        let n = stats.n as f64;
        let x_mean: Vec<f64> = stats.sx.iter().map(|v| v / n).collect();
        let y_mean = stats.sy / n;
        let cov = |j: usize, k: usize| stats.sxx[j * p + k] / n - x_mean[j] * x_mean[k];
        let scale: Vec<f64> = (0..p)
            .map(|j| {
                let v = cov(j, j);
                let sq = stats.sxx[j * p + j] / n;
                if v > 1e-12 * sq.max(f64::MIN_POSITIVE) {
                    v.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        let mut q = vec![0.0; p * p];
        let mut c = vec![0.0; p];
        for j in 0..p {
            if scale[j] == 0.0 {
                continue;
            }
            for k in 0..p {
                if scale[k] != 0.0 {
                    q[j * p + k] = cov(j, k) / (scale[j] * scale[k]);
                }
            }
            q[j * p + j] = 1.0;
            c[j] = (stats.sxy[j] / n - x_mean[j] * y_mean) / scale[j];
        }
        Problem {
            p,
            x_mean,
            y_mean,
            scale,
            q,
            c,
            y_var: (stats.syy / n - y_mean * y_mean).max(0.0),
        }
    }

    fn lambda_max(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `c - Q beta`, recomputed from scratch.
    fn residual_correlation(&self, beta: &[f64]) -> Vec<f64> {
        (0..self.p)
            .map(|j| {
                let row = &self.q[j * self.p..(j + 1) * self.p];
                self.c[j] - row.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }

    fn objective(&self, beta: &[f64], r: &[f64], lambda: f64) -> f64 {
        let cb: f64 = self.c.iter().zip(beta).map(|(a, b)| a * b).sum();
        let rb: f64 = r.iter().zip(beta).map(|(a, b)| a * b).sum();
        let l1: f64 = beta.iter().map(|b| b.abs()).sum();
        0.5 * (self.y_var - cb - rb) + lambda * l1
    }

    fn kkt_violation(&self, beta: &[f64], r: &[f64], lambda: f64) -> f64 {
        (0..self.p)
            .filter(|&j| self.scale[j] != 0.0)
            .map(|j| {
                if beta[j] != 0.0 {
                    (-r[j] + lambda * beta[j].signum()).abs()
                } else {
                    (r[j].abs() - lambda).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }

    /// One cyclic pass over `coords`, updating `beta` and `r` in place.
    /// Returns the largest coefficient change.
    fn sweep(
        &self,
        coords: impl Iterator<Item = usize>,
        beta: &mut [f64],
        r: &mut [f64],
        lambda: f64,
    ) -> f64 {
        let p = self.p;
        let mut max_delta: f64 = 0.0;
        for j in coords {
            let old = beta[j];
            let new = soft_threshold(r[j] + old, lambda);
            if new != old {
                let delta = new - old;
                beta[j] = new;
                let col = &self.q[j * p..(j + 1) * p];
                for (rk, qk) in r.iter_mut().zip(col) {
                    *rk -= delta * qk;
                }
                max_delta = max_delta.max(delta.abs());
            }
        }
        max_delta
    }

    /// Coordinate descent from the warm start `beta`.
    ///
    /// Full sweeps alternate with sweeps restricted to the nonzero
    /// coefficients; convergence is only declared after a full sweep, with
    /// the residual correlation recomputed from scratch.
    fn solve(&self, beta: &mut [f64], lambda: f64, tol: f64, max_sweeps: usize) -> Solve {
        let mut r = self.residual_correlation(beta);
        let mut trace = Vec::new();
        let mut converged = false;
        let mut sweeps = 0;
        let usable: Vec<usize> = (0..self.p).filter(|&j| self.scale[j] != 0.0).collect();
        let mut active = Vec::new();
        'outer: while sweeps < max_sweeps {
            sweeps += 1;
            let delta = self.sweep(usable.iter().copied(), beta, &mut r, lambda);
            trace.push(self.objective(beta, &r, lambda));
            if delta <= tol {
                r = self.residual_correlation(beta);
                if self.kkt_violation(beta, &r, lambda) <= tol {
                    converged = true;
                    break;
                }
            }
            active.clear();
            active.extend(usable.iter().copied().filter(|&j| beta[j] != 0.0));
            loop {
                if sweeps >= max_sweeps {
                    break 'outer;
                }
                sweeps += 1;
                let delta = self.sweep(active.iter().copied(), beta, &mut r, lambda);
                trace.push(self.objective(beta, &r, lambda));
                if delta <= tol {
                    break;
                }
            }
        }
        Solve {
            sweeps,
            converged,
            trace,
        }
    }

    fn to_fit(&self, beta: Vec<f64>, lambda: f64, solve: Solve, shift: &Shift) -> LassoFit {
        let coefficients: Vec<f64> = (0..self.p)
            .map(|j| {
                if self.scale[j] == 0.0 {
                    0.0
                } else {
                    beta[j] / self.scale[j]
                }
            })
            .collect();
        // Means here are of globally centred data; undo the centring.
        let intercept = self.y_mean + shift.y
            - (0..self.p)
                .map(|j| coefficients[j] * (self.x_mean[j] + shift.x[j]))
                .sum::<f64>();
        LassoFit {
            coefficients,
            intercept,
            standardized: beta,
            lambda,
            n_iterations: solve.sweeps,
            converged: solve.converged,
            objective_trace: solve.trace,
        }
    }
}

struct Solve {
    sweeps: usize,
    converged: bool,
    trace: Vec<f64>,
}

/// Column and response means removed before accumulating sums.
struct Shift {
    x: Vec<f64>,
    y: f64,
}

fn centred(data: &Dataset) -> (Vec<Vec<f64>>, Vec<f64>, Shift) {
    let shift = Shift {
        x: data.columns().map(crate::dataset::mean).collect(),
        y: crate::dataset::mean(data.y()),
    };
    let x = data
        .columns()
        .zip(&shift.x)
        .map(|(c, m)| c.iter().map(|v| v - m).collect())
        .collect();
    let y = data.y().iter().map(|v| v - shift.y).collect();
    (x, y, shift)
}

/// Fits the Lasso at a single `lambda`, starting from zero.
///
/// Never fails on non-convergence: the fit is returned with
/// `converged = false` after `max_sweeps` sweeps.
pub fn lasso_fit(data: &Dataset, lambda: f64, tol: f64, max_sweeps: usize) -> Result<LassoFit> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid(format!("tol must be > 0, got {tol}")));
    }
    let (x, y, shift) = centred(data);
    let rows: Vec<usize> = (0..data.n()).collect();
    let problem = Problem::new(&SuffStats::from_rows(&x, &y, &rows));
    let mut beta = vec![0.0; data.p()];
    let solve = problem.solve(&mut beta, lambda, tol, max_sweeps);
    Ok(problem.to_fit(beta, lambda, solve, &shift))
}

/// Cross-validated Lasso path.
#[derive(Clone, Debug)]
pub struct LassoCv {
    /// Geometric grid from `lambda_max` down to `lambda_max * 1e-3`.
    pub lambdas: Vec<f64>,
    /// Mean held-out squared error per lambda.
    pub cv_mse: Vec<f64>,
    pub best_index: usize,
    /// Refit on all rows at the selected lambda.
    pub fit: LassoFit,
}

impl LassoCv {
    pub fn best_lambda(&self) -> f64 {
        self.lambdas[self.best_index]
    }
}

fn lambda_grid(lambda_max: f64, n_lambdas: usize) -> Vec<f64> {
    if n_lambdas == 1 {
        return vec![lambda_max];
    }
    (0..n_lambdas)
        .map(|i| lambda_max * PATH_RATIO.powf(i as f64 / (n_lambdas - 1) as f64))
        .collect()
}

pub fn lasso_cv(data: &Dataset, n_lambdas: usize, n_folds: usize, seed: u64) -> Result<LassoCv> {
    if n_folds < 2 {
        return Err(Error::invalid(format!(
            "n_folds must be >= 2, got {n_folds}"
        )));
    }
    if n_lambdas < 1 {
        return Err(Error::invalid("n_lambdas must be >= 1"));
    }
    let n = data.n();
    if n < n_folds {
        return Err(Error::invalid(format!(
            "{n} samples cannot be split into {n_folds} folds"
        )));
    }
    let (x, y, shift) = centred(data);
    let all: Vec<usize> = (0..n).collect();
    let total = SuffStats::from_rows(&x, &y, &all);
    let full = Problem::new(&total);
    let lambda_max = full.lambda_max();
    let lambdas = lambda_grid(lambda_max, n_lambdas);
    let tol = PATH_TOL * full.y_var.sqrt().max(f64::MIN_POSITIVE);

    let mut order = all.clone();
    order.shuffle(&mut Stream::new(seed).rng());
    let mut folds = vec![Vec::new(); n_folds];
    for (pos, &i) in order.iter().enumerate() {
        folds[pos % n_folds].push(i);
    }

    let mut sq_err = vec![0.0; lambdas.len()];
    for fold in &mut folds {
        fold.sort_unstable();
        let held = SuffStats::from_rows(&x, &y, fold);
        let train = Problem::new(&total.minus(&held));
        let mut beta = vec![0.0; data.p()];
        for (li, &lambda) in lambdas.iter().enumerate() {
            train.solve(&mut beta, lambda, tol, PATH_MAX_SWEEPS);
            let coef: Vec<f64> = (0..data.p())
                .map(|j| {
                    if train.scale[j] == 0.0 {
                        0.0
                    } else {
                        beta[j] / train.scale[j]
                    }
                })
                .collect();
            let active: Vec<usize> = (0..data.p()).filter(|&j| coef[j] != 0.0).collect();
            for &i in fold.iter() {
                let pred = train.y_mean
                    + active
                        .iter()
                        .map(|&j| coef[j] * (x[j][i] - train.x_mean[j]))
                        .sum::<f64>();
                let e = y[i] - pred;
                sq_err[li] += e * e;
            }
        }
    }
    let cv_mse: Vec<f64> = sq_err.iter().map(|e| e / n as f64).collect();
    // First minimum, i.e. the largest lambda attaining it.
    let best_index = (0..cv_mse.len()).fold(0, |b, i| if cv_mse[i] < cv_mse[b] { i } else { b });

    let mut beta = vec![0.0; data.p()];
    let mut last = None;
    for &lambda in &lambdas[..=best_index] {
        last = Some(full.solve(&mut beta, lambda, tol, PATH_MAX_SWEEPS));
    }
    let fit = full.to_fit(
        beta,
        lambdas[best_index],
        last.expect("non-empty path"),
        &shift,
    );
    Ok(LassoCv {
        lambdas,
        cv_mse,
        best_index,
        fit,
    })
}

/// Features by descending `|beta|` at the cross-validated lambda; zero
/// coefficients rank last, ties by index.
pub fn lasso_rank(
    data: &Dataset,
    n_lambdas: usize,
    n_folds: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let cv = lasso_cv(data, n_lambdas, n_folds, seed)?;
    let mags: Vec<f64> = cv.fit.standardized.iter().map(|b| b.abs()).collect();
    Ok(rank_descending(&mags))
}
