//! Block-wise reconstruction errors and memory-depth sweeps.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sinar::{build_hankel, fit, Dictionary, NarModel};
use crate::trajectory::{relative_error, Trajectory};

/// Relative reconstruction error of every scored block.
///
/// The trajectory is cut into blocks `[x_{jl}, …, x_{(j+1)l-1}]`; a trailing
/// partial block is dropped. Block `j ≥ 1` is predicted by rolling the model
/// out from the last `p` states of block `j-1`, so block 0 only seeds.
/// Rollouts that diverge score `+∞`. A block that is identically zero (every
/// observed opinion extinct) has no relative error and scores NaN.
pub fn block_errors(model: &NarModel, trajectory: &Trajectory, block_len: usize) -> Result<Vec<f64>> {
    let p = model.p();
    if block_len < p {
        return Err(Error::invalid(format!("block length {block_len} is shorter than depth {p}")));
    }
    if trajectory.len() < 2 * block_len {
        return Err(Error::invalid(format!(
            "trajectory has {} states, need at least {} for one scored block of length {block_len}",
            trajectory.len(),
            2 * block_len
        )));
    }
    let n_blocks = trajectory.len() / block_len;
    (1..n_blocks)
        .map(|j| {
            let start = j * block_len;
            let seed = trajectory.slice(start - p..start);
            let truth = trajectory.slice(start..start + block_len);
            if truth.as_flat().iter().all(|&v| v == 0.0) {
                return Ok(f64::NAN);
            }
            match model.rollout(&seed, block_len) {
                Ok(pred) => relative_error(&truth, &pred),
                Err(Error::Diverged { .. }) => Ok(f64::INFINITY),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Relative error of all one-step predictions from true histories.
pub fn one_step_error(model: &NarModel, trajectory: &Trajectory) -> Result<f64> {
    let data = build_hankel(std::slice::from_ref(trajectory), model.p())?;
    let theta = crate::sinar::feature_matrix(&model.dictionary, &data.stacked)?;
    let pred = &model.xi * theta;
    let diff = (&data.next - &pred).norm();
    Ok(diff / data.next.norm())
}

/// Largest distance by which any state leaves the probability simplex,
/// where each state holds the first `M-1` percentages and the last is
/// implied: `max(0, -min_i x_i, Σ x_i - 1)`.
pub fn simplex_violation(trajectory: &Trajectory) -> f64 {
    trajectory
        .states()
        .map(|s| {
            let low = s.iter().fold(0.0f64, |m, &v| m.max(-v));
            low.max(s.iter().sum::<f64>() - 1.0)
        })
        .fold(0.0, f64::max)
}

/// Splits realisations by index: the first `train` for fitting, the rest for
/// validation.
pub fn split_realisations(trajectories: &[Trajectory], train: usize) -> Result<(&[Trajectory], &[Trajectory])> {
    if train == 0 || train >= trajectories.len() {
        return Err(Error::invalid(format!(
            "cannot split {} realisations into {train} training and a non-empty validation set",
            trajectories.len()
        )));
    }
    Ok(trajectories.split_at(train))
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub p: usize,
    pub lambda: f64,
    pub mean_block_error: f64,
    pub mean_one_step_error: f64,
    pub n_blocks: usize,
    pub n_diverged: usize,
    /// Blocks left out of the mean because their truth is identically zero.
    pub n_undefined: usize,
    pub model: NarModel,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Cells ordered by `p`, then by the order of the given λ values.
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn cell(&self, p: usize, lambda: f64) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.p == p && c.lambda == lambda)
    }

    /// Mean block errors for one λ, in increasing `p`.
    pub fn block_error_curve(&self, lambda: f64) -> Vec<(usize, f64)> {
        self.cells
            .iter()
            .filter(|c| c.lambda == lambda)
            .map(|c| (c.p, c.mean_block_error))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("p,lambda,mean_block_error,mean_one_step_error,n_blocks,n_diverged,n_undefined\n");
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{},{:.16e},{:.16e},{:.16e},{},{},{}",
                c.p,
                c.lambda,
                c.mean_block_error,
                c.mean_one_step_error,
                c.n_blocks,
                c.n_diverged,
                c.n_undefined
            );
        }
        s
    }
}

/// Fits one model per `(p, λ)` on the concatenated training data and scores
/// it on every validation trajectory.
pub fn memory_sweep<F>(
    train: &[Trajectory],
    validate: &[Trajectory],
    dict_builder: F,
    p_values: &[usize],
    lambdas: &[f64],
    block_len: usize,
) -> Result<SweepResult>
where
    F: Fn(usize) -> Result<Dictionary> + Sync,
{
    if p_values.is_empty() {
        return Err(Error::invalid("no memory depths given"));
    }
    if p_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("memory depths must be strictly increasing"));
    }
    if lambdas.is_empty() {
        return Err(Error::invalid("no lambda values given"));
    }
    if validate.is_empty() {
        return Err(Error::invalid("no validation trajectories"));
    }
    let grid: Vec<(usize, f64)> = p_values
        .iter()
        .flat_map(|&p| lambdas.iter().map(move |&l| (p, l)))
        .collect();
    let cells = grid
        .par_iter()
        .map(|&(p, lambda)| {
            let dict = dict_builder(p)?;
            let data = build_hankel(train, p)?;
            let model = fit(&data, &dict, lambda)?;
            let mut errors = Vec::new();
            let mut one_step = Vec::new();
            for traj in validate {
                errors.extend(block_errors(&model, traj, block_len)?);
                one_step.push(one_step_error(&model, traj)?);
            }
            let n_blocks = errors.len();
            errors.retain(|e| !e.is_nan());
            one_step.retain(|e| !e.is_nan());
            let n_diverged = errors.iter().filter(|e| e.is_infinite()).count();
            Ok(SweepCell {
                p,
                lambda,
                mean_block_error: mean(&errors),
                mean_one_step_error: mean(&one_step),
                n_blocks,
                n_diverged,
                n_undefined: n_blocks - errors.len(),
                model,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { cells })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
