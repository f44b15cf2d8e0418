use log::warn;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::dictionary::Dictionary;
use super::hankel::HankelData;
use super::lasso::{least_squares, LassoOptions, LassoProblem, Penalty};
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Coefficients with magnitude below this are stored as exact zeros after a
/// penalised fit.
pub const ZERO_THRESHOLD: f64 = 1e-8;

/// Upper bound on threshold-and-refit rounds.
const MAX_THRESHOLD_ROUNDS: usize = 100;

/// How the sparsity weight `λ` enters a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// LASSO `‖r‖₂² + λ·n·‖w‖₁` per output row.
    LassoMeanSquared,
    /// LASSO `‖r‖₂ + λ‖w‖₁` per output row.
    LassoResidualNorm,
    /// Least squares, then repeatedly drop terms with `|w| < λ` and refit on
    /// the rest until the support is stable.
    SequentialThreshold,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::LassoMeanSquared => "lasso-mean-squared",
            Method::LassoResidualNorm => "lasso-residual-norm",
            Method::SequentialThreshold => "sequential-threshold",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "lasso-mean-squared" => Some(Method::LassoMeanSquared),
            "lasso-residual-norm" => Some(Method::LassoResidualNorm),
            "sequential-threshold" => Some(Method::SequentialThreshold),
            _ => None,
        }
    }

    pub const ALL: [Method; 3] = [
        Method::LassoMeanSquared,
        Method::LassoResidualNorm,
        Method::SequentialThreshold,
    ];
}


#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    /// Minimum-norm least squares, used for unpenalised fits.
    LeastSquares,
    CoordinateDescent,
    SequentialThreshold,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::LeastSquares => "least-squares",
            Solver::CoordinateDescent => "coordinate-descent",
            Solver::SequentialThreshold => "sequential-threshold",
        }
    }

    pub fn parse(s: &str) -> Option<Solver> {
        match s {
            "least-squares" => Some(Solver::LeastSquares),
            "coordinate-descent" => Some(Solver::CoordinateDescent),
            "sequential-threshold" => Some(Solver::SequentialThreshold),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitDiagnostics {
    pub solver: Solver,
    pub n_samples: usize,
    /// Numerical rank of the feature matrix for least-squares fits.
    pub rank: Option<usize>,
    pub rank_deficient: bool,
    /// Coordinate-descent sweeps or thresholding rounds per output row.
    pub sweeps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub method: Method,
    pub zero_threshold: f64,
    pub lasso: LassoOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            method: Method::SequentialThreshold,
            zero_threshold: ZERO_THRESHOLD,
            lasso: LassoOptions::default(),
        }
    }
}

/// A fitted nonlinear autoregressive model `x_{t+1} = Ξ Θ(x_t, …, x_{t-p+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct NarModel {
    pub dictionary: Dictionary,
    /// `m × v` coefficient matrix.
    pub xi: DMatrix<f64>,
    pub lambda: f64,
    pub method: Method,
    pub noise_cov: Option<DMatrix<f64>>,
    pub diagnostics: FitDiagnostics,
}

/// Per-delay coefficient blocks `H_0, …, H_{p-1}` of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientBlocks {
    pub constant: Option<DVector<f64>>,
    pub blocks: Vec<DMatrix<f64>>,
}

impl CoefficientBlocks {
    /// Reassembles the full coefficient matrix.
    pub fn concatenate(&self) -> DMatrix<f64> {
        let m = self.blocks[0].nrows();
        let per = self.blocks[0].ncols();
        let offset = usize::from(self.constant.is_some());
        let mut xi = DMatrix::zeros(m, offset + per * self.blocks.len());
        if let Some(c) = &self.constant {
            xi.column_mut(0).copy_from(c);
        }
        for (k, h) in self.blocks.iter().enumerate() {
            xi.columns_mut(offset + k * per, per).copy_from(h);
        }
        xi
    }
}

/// Evaluates the dictionary on every column of the stacked data (`v × n`).
pub fn feature_matrix(dict: &Dictionary, stacked: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if stacked.nrows() != dict.m() * dict.max_delay() {
        return Err(Error::invalid(format!(
            "stacked data has {} rows, dictionary expects {}",
            stacked.nrows(),
            dict.m() * dict.max_delay()
        )));
    }
    let v = dict.len();
    let mut theta = DMatrix::zeros(v, stacked.ncols());
    let mut buf = vec![0.0; v];
    for (c, col) in stacked.column_iter().enumerate() {
        dict.evaluate_into(col.as_slice(), &mut buf);
        theta.column_mut(c).copy_from_slice(&buf);
    }
    Ok(theta)
}

pub fn fit(data: &HankelData, dict: &Dictionary, lambda: f64) -> Result<NarModel> {
    fit_with(data, dict, lambda, &FitOptions::default())
}

pub fn fit_with(data: &HankelData, dict: &Dictionary, lambda: f64, opts: &FitOptions) -> Result<NarModel> {
    if dict.m() != data.m || dict.max_delay() != data.p {
        return Err(Error::invalid(format!(
            "dictionary (m = {}, p = {}) does not match data (m = {}, p = {})",
            dict.m(),
            dict.max_delay(),
            data.m,
            data.p
        )));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    let theta = feature_matrix(dict, &data.stacked)?;
    let n = theta.ncols();
    if n == 0 {
        return Err(Error::invalid("no data columns"));
    }

    let (xi, diagnostics) = match opts.method {
        _ if lambda == 0.0 => {
            let (xi, rank) = least_squares_flagged(&theta, &data.next, dict.len())?;
            (xi, diagnostics(Solver::LeastSquares, n, Some(rank), dict.len(), Vec::new()))
        }
        Method::SequentialThreshold => {
            let (full, rank) = least_squares_flagged(&theta, &data.next, dict.len())?;
            let rows: Vec<(Vec<f64>, usize)> = (0..data.m)
                .into_par_iter()
                .map(|i| {
                    let y = data.next.rows(i, 1).into_owned();
                    let start: Vec<f64> = full.row(i).iter().copied().collect();
                    sequential_threshold(&theta, &y, start, lambda)
                })
                .collect::<Result<_>>()?;
            let mut xi = DMatrix::zeros(data.m, dict.len());
            for (i, (w, _)) in rows.iter().enumerate() {
                xi.row_mut(i).copy_from_slice(w);
            }
            let rounds = rows.iter().map(|r| r.1).collect();
            (xi, diagnostics(Solver::SequentialThreshold, n, Some(rank), dict.len(), rounds))
        }
        Method::LassoMeanSquared | Method::LassoResidualNorm => {
            let penalty = if opts.method == Method::LassoMeanSquared {
                Penalty::MeanSquared
            } else {
                Penalty::ResidualNorm
            };
            let problem = LassoProblem::new(&theta)?;
            let rows: Vec<_> = (0..data.m)
                .into_par_iter()
                .map(|i| {
                    let y: Vec<f64> = data.next.row(i).iter().copied().collect();
                    problem.solve_with_penalty(&y, lambda, penalty, &opts.lasso)
                })
                .collect::<Result<_>>()?;
            let mut xi = DMatrix::zeros(data.m, dict.len());
            for (i, r) in rows.iter().enumerate() {
                for (j, w) in r.coefficients.iter().enumerate() {
                    xi[(i, j)] = if w.abs() < opts.zero_threshold { 0.0 } else { *w };
                }
            }
            let sweeps = rows.iter().map(|r| r.sweeps).collect();
            (xi, diagnostics(Solver::CoordinateDescent, n, None, dict.len(), sweeps))
        }
    };

    let mut model = NarModel {
        dictionary: dict.clone(),
        xi,
        lambda,
        method: opts.method,
        noise_cov: None,
        diagnostics,
    };
    if n >= 2 {
        model.noise_cov = Some(residual_covariance(&model, &theta, &data.next));
    }
    Ok(model)
}

fn diagnostics(solver: Solver, n: usize, rank: Option<usize>, v: usize, sweeps: Vec<usize>) -> FitDiagnostics {
    FitDiagnostics {
        solver,
        n_samples: n,
        rank,
        rank_deficient: rank.is_some_and(|r| r < v),
        sweeps,
    }
}

fn least_squares_flagged(theta: &DMatrix<f64>, next: &DMatrix<f64>, v: usize) -> Result<(DMatrix<f64>, usize)> {
    let (xi, rank) = least_squares(theta, next)?;
    if rank < v {
        warn!("feature matrix has rank {rank} < {v} features; using the minimum-norm solution");
    }
    Ok((xi, rank))
}

/// Threshold-and-refit for one output row `y` (`1 × n`). Returns the
/// coefficients and the number of refits.
fn sequential_threshold(
    theta: &DMatrix<f64>,
    y: &DMatrix<f64>,
    mut w: Vec<f64>,
    lambda: f64,
) -> Result<(Vec<f64>, usize)> {
    let mut support: Vec<usize> = (0..w.len()).collect();
    for round in 0..MAX_THRESHOLD_ROUNDS {
        let kept: Vec<usize> = support.iter().copied().filter(|&j| w[j].abs() >= lambda).collect();
        if kept.len() == support.len() {
            return Ok((w, round));
        }
        support = kept;
        w.iter_mut().for_each(|v| *v = 0.0);
        if support.is_empty() {
            return Ok((w, round + 1));
        }
        let sub = theta.select_rows(support.iter());
        let (coef, _) = least_squares(&sub, y)?;
        for (k, &j) in support.iter().enumerate() {
            w[j] = coef[(0, k)];
        }
    }
    Ok((w, MAX_THRESHOLD_ROUNDS))
}

fn residual_covariance(model: &NarModel, theta: &DMatrix<f64>, next: &DMatrix<f64>) -> DMatrix<f64> {
    let mut r = next - &model.xi * theta;
    let n = r.ncols();
    for mut row in r.row_iter_mut() {
        let mean = row.sum() / n as f64;
        row.add_scalar_mut(-mean);
    }
    (&r * r.transpose()) / (n as f64 - 1.0)
}

/// Unbiased covariance of the one-step residuals of `model` on `data`.
pub fn estimate_noise_covariance(model: &NarModel, data: &HankelData) -> Result<DMatrix<f64>> {
    if data.n_columns() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 residuals for a covariance, got {}",
            data.n_columns()
        )));
    }
    if data.m != model.m() {
        return Err(Error::invalid("data dimension does not match model"));
    }
    let theta = feature_matrix(&model.dictionary, &data.stacked)?;
    Ok(residual_covariance(model, &theta, &data.next))
}

impl NarModel {
    /// Builds a model from known coefficients.
    pub fn from_coefficients(dictionary: Dictionary, xi: DMatrix<f64>, lambda: f64) -> Result<NarModel> {
        if xi.nrows() != dictionary.m() || xi.ncols() != dictionary.len() {
            return Err(Error::invalid(format!(
                "coefficient matrix is {}x{}, dictionary needs {}x{}",
                xi.nrows(),
                xi.ncols(),
                dictionary.m(),
                dictionary.len()
            )));
        }
        Ok(NarModel {
            dictionary,
            xi,
            lambda,
            method: FitOptions::default().method,
            noise_cov: None,
            diagnostics: FitDiagnostics {
                solver: Solver::LeastSquares,
                n_samples: 0,
                rank: None,
                rank_deficient: false,
                sweeps: Vec::new(),
            },
        })
    }

    pub fn m(&self) -> usize {
        self.dictionary.m()
    }

    pub fn p(&self) -> usize {
        self.dictionary.max_delay()
    }

    pub fn nonzero_count(&self) -> usize {
        self.xi.iter().filter(|v| **v != 0.0).count()
    }

    /// Prediction from a stacked newest-first history of length `m·p`.
    pub fn predict_stacked(&self, stacked: &[f64]) -> Result<Vec<f64>> {
        let theta = self.dictionary.evaluate(stacked)?;
        Ok((&self.xi * DVector::from_vec(theta)).iter().copied().collect())
    }

    /// One-step prediction from the `p` most recent states, newest first.
    pub fn predict_one_step<S: AsRef<[f64]>>(&self, history: &[S]) -> Result<Vec<f64>> {
        if history.len() != self.p() {
            return Err(Error::invalid(format!(
                "history has {} states, model needs {}",
                history.len(),
                self.p()
            )));
        }
        let mut stacked = Vec::with_capacity(self.m() * self.p());
        for s in history {
            let s = s.as_ref();
            if s.len() != self.m() {
                return Err(Error::invalid(format!(
                    "history state has dimension {}, model needs {}",
                    s.len(),
                    self.m()
                )));
            }
            stacked.extend_from_slice(s);
        }
        self.predict_stacked(&stacked)
    }

    /// Iterates the model `steps` times from the last `p` states of `seed`
    /// (chronological order) and returns the predicted states.
    pub fn rollout(&self, seed: &Trajectory, steps: usize) -> Result<Trajectory> {
        let (m, p) = (self.m(), self.p());
        if seed.dim() != m {
            return Err(Error::invalid(format!(
                "seed has dimension {}, model needs {m}",
                seed.dim()
            )));
        }
        if seed.len() < p {
            return Err(Error::invalid(format!(
                "seed has {} states, model needs {p}",
                seed.len()
            )));
        }
        let mut stacked = Vec::with_capacity(m * p);
        for k in 0..p {
            stacked.extend_from_slice(seed.state(seed.len() - 1 - k));
        }
        let mut theta = vec![0.0; self.dictionary.len()];
        let mut out = Trajectory::with_capacity(m, steps);
        let mut next = vec![0.0; m];
        for step in 0..steps {
            self.dictionary.evaluate_into(&stacked, &mut theta);
            for (i, x) in next.iter_mut().enumerate() {
                *x = self.xi.row(i).iter().zip(&theta).map(|(a, b)| a * b).sum();
            }
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged { step, partial: out });
            }
            out.push(&next)?;
            stacked.copy_within(0..m * (p - 1), m);
            stacked[..m].copy_from_slice(&next);
        }
        Ok(out)
    }

    /// Splits the coefficients into per-delay blocks.
    pub fn coefficients_as_blocks(&self) -> Result<CoefficientBlocks> {
        let dict = &self.dictionary;
        let per = dict
            .terms_per_delay()
            .ok_or_else(|| Error::Unsupported("dictionary has unequal term counts per delay".into()))?;
        let first = &dict.terms()[..per];
        for (i, t) in dict.terms().iter().enumerate() {
            let template = &first[i % per];
            if t.delay != i / per || t.exponents != template.exponents {
                return Err(Error::Unsupported(
                    "dictionary terms do not repeat the same pattern at every delay".into(),
                ));
            }
        }
        let offset = usize::from(dict.has_constant());
        let constant = dict.has_constant().then(|| self.xi.column(0).into_owned());
        let blocks = (0..self.p())
            .map(|k| self.xi.columns(offset + k * per, per).into_owned())
            .collect();
        Ok(CoefficientBlocks { constant, blocks })
    }

    /// Human-readable equations, one per output row, omitting zeros.
    pub fn equations(&self) -> Vec<String> {
        (0..self.m())
            .map(|i| {
                let mut s = format!("x{}(t+1) =", i + 1);
                let mut first = true;
                for j in 0..self.dictionary.len() {
                    let c = self.xi[(i, j)];
                    if c == 0.0 {
                        continue;
                    }
                    let sign = if c < 0.0 { "-" } else if first { "" } else { "+" };
                    let sep = if first && c >= 0.0 { "" } else { " " };
                    s.push_str(&format!(" {sign}{sep}{:.4} {}", c.abs(), self.dictionary.label(j)));
                    first = false;
                }
                if first {
                    s.push_str(" 0");
                }
                s
            })
            .collect()
    }
}
