//! Coordinate-descent LASSO on a shared feature matrix.
//!
//! For a `v×n` feature matrix `A` and targets `y`, [`LassoProblem::solve`]
//! minimises `‖y − wᵀA‖₂² + λ·n·‖w‖₁` and
//! [`LassoProblem::solve_residual_norm`] minimises `‖y − wᵀA‖₂ + λ‖w‖₁`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoOptions {
    /// Stop once the largest coefficient change of a sweep is below this.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Record the objective after every sweep.
    pub trace_objective: bool,
}

impl Default for LassoOptions {
    fn default() -> Self {
        LassoOptions {
            tol: 1e-12,
            max_sweeps: 100_000,
            trace_objective: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub coefficients: Vec<f64>,
    pub sweeps: usize,
    /// Objective value at the start and after each sweep, if requested.
    pub objective_trace: Vec<f64>,
}

/// Precomputed Gram matrix `A Aᵀ` for repeated solves against one feature
/// matrix.
#[derive(Debug, Clone)]
pub struct LassoProblem<'a> {
    features: &'a DMatrix<f64>,
    gram: DMatrix<f64>,
}

impl<'a> LassoProblem<'a> {
    pub fn new(features: &'a DMatrix<f64>) -> Result<LassoProblem<'a>> {
        if features.ncols() == 0 {
            return Err(Error::invalid("feature matrix has no samples"));
        }
        if features.nrows() == 0 {
            return Err(Error::invalid("feature matrix has no features"));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature matrix contains non-finite values"));
        }
        let gram = features * features.transpose();
        Ok(LassoProblem { features, gram })
    }

    pub fn n_features(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.features.ncols()
    }

    /// `‖y − wᵀA‖₂² + λ·n·‖w‖₁`, evaluated from the residuals.
    pub fn objective(&self, targets: &[f64], lambda: f64, w: &[f64]) -> f64 {
        let pred = self.features.transpose() * DVector::from_column_slice(w);
        let rss: f64 = targets.iter().zip(pred.iter()).map(|(y, p)| (y - p) * (y - p)).sum();
        let l1: f64 = w.iter().map(|v| v.abs()).sum();
        rss + lambda * self.n_samples() as f64 * l1
    }

    /// Solves `min ‖y − wᵀA‖₂² + λ·n·‖w‖₁`.
    pub fn solve(&self, targets: &[f64], lambda: f64, opts: &LassoOptions) -> Result<LassoFit> {
        self.check(targets, lambda)?;
        let c = self.features * DVector::from_column_slice(targets);
        let threshold = lambda * self.n_samples() as f64 / 2.0;
        let mut w = vec![0.0; self.n_features()];
        let trace_with = opts.trace_objective.then_some((targets, lambda));
        let (sweeps, trace) = self.descend(&c, threshold, &mut w, opts, trace_with)?;
        Ok(LassoFit {
            coefficients: w,
            sweeps,
            objective_trace: trace,
        })
    }

    /// Solves `min ‖y − wᵀA‖₂ + λ‖w‖₁` (unsquared residual norm).
    ///
    /// The minimiser solves the squared problem `min ‖y − wᵀA‖₂² + 2λσ‖w‖₁`
    /// at the scale `σ` where `σ = ‖y − w(σ)ᵀA‖₂`. The residual norm grows
    /// with `σ` and never exceeds `‖y‖`, so the root of `‖r(σ)‖ − σ` is
    /// bracketed by `[0, ‖y‖]` and found by safeguarded secant steps.
    pub fn solve_residual_norm(&self, targets: &[f64], lambda: f64, opts: &LassoOptions) -> Result<LassoFit> {
        self.check(targets, lambda)?;
        let c = self.features * DVector::from_column_slice(targets);
        let mut w = vec![0.0; self.n_features()];
        let y_norm = self.residual_norm(targets, &w);
        let done = |w: Vec<f64>, sweeps| LassoFit {
            coefficients: w,
            sweeps,
            objective_trace: Vec::new(),
        };
        if y_norm == 0.0 {
            return Ok(done(w, 0));
        }
        let mut total = 0;
        let eval = |sigma: f64, w: &mut [f64], total: &mut usize| -> Result<f64> {
            let (sweeps, _) = self.descend(&c, lambda * sigma, w, opts, None)?;
            *total += sweeps;
            Ok(self.residual_norm(targets, w) - sigma)
        };
        // g(lo) >= 0 >= g(hi); at σ = 0 the fit is plain least squares
        let (mut hi, mut g_hi) = (y_norm, eval(y_norm, &mut w, &mut total)?);
        if g_hi >= 0.0 {
            return Ok(done(w, total));
        }
        let y = DMatrix::from_row_slice(1, targets.len(), targets);
        let (ls, _) = least_squares(self.features, &y)?;
        let ls: Vec<f64> = ls.iter().copied().collect();
        let (mut lo, mut g_lo) = (0.0, self.residual_norm(targets, &ls));
        let mut last_side = 0i8;
        for _ in 0..MAX_SCALE_ITERATIONS {
            let mut sigma = if g_lo > 0.0 {
                hi - g_hi * (hi - lo) / (g_hi - g_lo)
            } else {
                0.5 * (lo + hi)
            };
            if !(sigma > lo && sigma < hi) {
                sigma = 0.5 * (lo + hi);
            }
            let g = eval(sigma, &mut w, &mut total)?;
            if g.abs() <= SCALE_TOL * sigma || hi - lo <= SCALE_TOL * hi {
                return Ok(done(w, total));
            }
            if g > 0.0 {
                (lo, g_lo) = (sigma, g);
                if last_side == 1 {
                    g_hi *= 0.5;
                }
                last_side = 1;
            } else {
                (hi, g_hi) = (sigma, g);
                if last_side == -1 {
                    g_lo *= 0.5;
                }
                last_side = -1;
            }
        }
        Err(Error::NotConverged {
            sweeps: total,
            max_change: hi - lo,
            coefficients: w,
        })
    }

    pub fn solve_with_penalty(
        &self,
        targets: &[f64],
        lambda: f64,
        penalty: Penalty,
        opts: &LassoOptions,
    ) -> Result<LassoFit> {
        match penalty {
            Penalty::MeanSquared => self.solve(targets, lambda, opts),
            Penalty::ResidualNorm => self.solve_residual_norm(targets, lambda, opts),
        }
    }

    fn residual_norm(&self, targets: &[f64], w: &[f64]) -> f64 {
        let pred = self.features.transpose() * DVector::from_column_slice(w);
        targets
            .iter()
            .zip(pred.iter())
            .map(|(y, p)| (y - p) * (y - p))
            .sum::<f64>()
            .sqrt()
    }

    fn check(&self, targets: &[f64], lambda: f64) -> Result<()> {
        let n = self.n_samples();
        if targets.len() != n {
            return Err(Error::invalid(format!(
                "{} targets for {n} samples",
                targets.len()
            )));
        }
        if targets.iter().any(|y| !y.is_finite()) {
            return Err(Error::invalid("targets contain non-finite values"));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::invalid(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        Ok(())
    }

    /// Cyclic coordinate descent on `wᵀGw − 2wᵀc + 2t‖w‖₁` from the given
    /// start. Every few sweeps the current sign pattern is tried as the exact
    /// answer by solving the reduced optimality conditions; the attempt is
    /// kept only if it satisfies all of them.
    fn descend(
        &self,
        c: &DVector<f64>,
        threshold: f64,
        w: &mut [f64],
        opts: &LassoOptions,
        trace_with: Option<(&[f64], f64)>,
    ) -> Result<(usize, Vec<f64>)> {
        let v = self.n_features();
        // ρ_j = c_j − (Gw)_j + G_jj w_j; the coordinate minimiser is S(ρ_j, t)/G_jj
        let mut gw: Vec<f64> = (&self.gram * DVector::from_column_slice(w)).iter().copied().collect();
        let mut trace = Vec::new();
        if let Some((y, lambda)) = trace_with {
            trace.push(self.objective(y, lambda, w));
        }
        for sweep in 1..=opts.max_sweeps {
            let mut max_change: f64 = 0.0;
            for j in 0..v {
                let gjj = self.gram[(j, j)];
                if gjj <= 0.0 {
                    continue;
                }
                let rho = c[j] - gw[j] + gjj * w[j];
                let new = soft_threshold(rho, threshold) / gjj;
                let delta = new - w[j];
                if delta != 0.0 {
                    w[j] = new;
                    for (g, col) in gw.iter_mut().zip(self.gram.column(j).iter()) {
                        *g += delta * col;
                    }
                    max_change = max_change.max(delta.abs());
                }
            }
            if let Some((y, lambda)) = trace_with {
                trace.push(self.objective(y, lambda, w));
            }
            if max_change < opts.tol {
                return Ok((sweep, trace));
            }
            if sweep == opts.max_sweeps {
                return Err(Error::NotConverged {
                    sweeps: sweep,
                    max_change,
                    coefficients: w.to_vec(),
                });
            }
            if sweep % POLISH_EVERY == 0 {
                if let Some(exact) = self.active_set_solution(c, threshold, w) {
                    w.copy_from_slice(&exact);
                    gw = (&self.gram * DVector::from_column_slice(w)).iter().copied().collect();
                }
            }
        }
        Ok((0, trace))
    }

    /// Solves `G_AA w_A = c_A − t·sign(w_A)` on the support of `w` and
    /// returns it if the signs persist and every inactive coordinate
    /// satisfies `|c_j − (Gw)_j| ≤ t`.
    fn active_set_solution(&self, c: &DVector<f64>, threshold: f64, w: &[f64]) -> Option<Vec<f64>> {
        let active: Vec<usize> = (0..w.len()).filter(|&j| w[j] != 0.0).collect();
        if active.is_empty() {
            return None;
        }
        let k = active.len();
        let g = DMatrix::from_fn(k, k, |a, b| self.gram[(active[a], active[b])]);
        let rhs = DVector::from_fn(k, |a, _| c[active[a]] - threshold * w[active[a]].signum());
        let z = g.cholesky()?.solve(&rhs);
        if z.iter().zip(&active).any(|(zi, &j)| zi.signum() != w[j].signum() || *zi == 0.0) {
            return None;
        }
        let mut out = vec![0.0; w.len()];
        for (zi, &j) in z.iter().zip(&active) {
            out[j] = *zi;
        }
        let gw = &self.gram * DVector::from_column_slice(&out);
        let slack = KKT_SLACK * (threshold + c.amax());
        let ok = (0..w.len())
            .filter(|j| out[*j] == 0.0)
            .all(|j| (c[j] - gw[j]).abs() <= threshold + slack);
        ok.then_some(out)
    }
}

/// How the ℓ1 weight `λ` is balanced against the data misfit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Penalty {
    /// `‖r‖₂² + λ·n·‖w‖₁`: λ weighs the mean squared error.
    MeanSquared,
    /// `‖r‖₂ + λ‖w‖₁`: λ weighs the residual norm itself.
    ResidualNorm,
}

impl Penalty {
    pub fn as_str(self) -> &'static str {
        match self {
            Penalty::MeanSquared => "mean-squared-error",
            Penalty::ResidualNorm => "residual-norm",
        }
    }

    pub fn parse(s: &str) -> Option<Penalty> {
        match s {
            "mean-squared-error" => Some(Penalty::MeanSquared),
            "residual-norm" => Some(Penalty::ResidualNorm),
            _ => None,
        }
    }
}

const POLISH_EVERY: usize = 25;
const KKT_SLACK: f64 = 1e-10;
const MAX_SCALE_ITERATIONS: usize = 500;
const SCALE_TOL: f64 = 1e-12;

#[inline]
fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Solves one LASSO problem with default options.
pub fn lasso_solve(features: &DMatrix<f64>, targets: &[f64], lambda: f64) -> Result<Vec<f64>> {
    lasso_solve_with(features, targets, lambda, &LassoOptions::default()).map(|f| f.coefficients)
}

pub fn lasso_solve_with(
    features: &DMatrix<f64>,
    targets: &[f64],
    lambda: f64,
    opts: &LassoOptions,
) -> Result<LassoFit> {
    LassoProblem::new(features)?.solve(targets, lambda, opts)
}

/// Minimum-norm least squares `W = argmin ‖Y − W A‖_F` for a `v×n` feature
/// matrix `A` and `m×n` targets `Y`. Returns `W` and the numerical rank of
/// `A`.
pub fn least_squares(features: &DMatrix<f64>, targets: &DMatrix<f64>) -> Result<(DMatrix<f64>, usize)> {
    if features.ncols() != targets.ncols() {
        return Err(Error::invalid("features and targets disagree on sample count"));
    }
    if features.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("least squares input contains non-finite values"));
    }
    let a = features.transpose();
    let b = targets.transpose();
    let (rows, cols) = a.shape();
    let svd = a.svd(true, true);
    let sigma_max = svd.singular_values.max();
    let eps = sigma_max * f64::EPSILON * rows.max(cols) as f64;
    let rank = svd.singular_values.iter().filter(|s| **s > eps).count();
    let w = svd
        .solve(&b, eps)
        .map_err(|e| Error::invalid(format!("least squares failed: {e}")))?;
    Ok((w.transpose(), rank))
}
