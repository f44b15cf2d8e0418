//! Time-indexed sequences of observable vectors.

use crate::error::{Error, Result};

/// A sequence of `len()` states of dimension `dim()`, stored row-major.
///
/// Used both for opinion percentages (macro trajectories) and for scalar or
/// vector observables of deterministic systems.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "trajectory dimension must be positive");
        Trajectory {
            dim,
            data: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, len: usize) -> Self {
        assert!(dim > 0, "trajectory dimension must be positive");
        Trajectory {
            dim,
            data: Vec::with_capacity(dim * len),
        }
    }

    /// Builds a trajectory from a flat row-major buffer.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("trajectory dimension must be positive"));
        }
        if data.len() % dim != 0 {
            return Err(Error::invalid(format!(
                "buffer of length {} is not a multiple of dimension {dim}",
                data.len()
            )));
        }
        Ok(Trajectory { dim, data })
    }

    pub fn from_states<S: AsRef<[f64]>>(states: &[S]) -> Result<Self> {
        let dim = states
            .first()
            .map(|s| s.as_ref().len())
            .ok_or_else(|| Error::invalid("cannot infer dimension of an empty state list"))?;
        let mut traj = Trajectory::try_new(dim)?;
        for s in states {
            traj.push(s.as_ref())?;
        }
        Ok(traj)
    }

    /// Scalar series as a one-dimensional trajectory.
    pub fn from_scalar(series: &[f64]) -> Self {
        Trajectory {
            dim: 1,
            data: series.to_vec(),
        }
    }

    fn try_new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("trajectory dimension must be positive"));
        }
        Ok(Trajectory::new(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn state(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn last(&self) -> Option<&[f64]> {
        if self.is_empty() {
            None
        } else {
            Some(self.state(self.len() - 1))
        }
    }

    pub fn push(&mut self, state: &[f64]) -> Result<()> {
        if state.len() != self.dim {
            return Err(Error::invalid(format!(
                "state of dimension {} pushed onto trajectory of dimension {}",
                state.len(),
                self.dim
            )));
        }
        self.data.extend_from_slice(state);
        Ok(())
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// States `range.start..range.end` as a new trajectory.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Trajectory {
        Trajectory {
            dim: self.dim,
            data: self.data[range.start * self.dim..range.end * self.dim].to_vec(),
        }
    }

    /// Keeps only the first `k` coordinates of every state.
    pub fn leading_coordinates(&self, k: usize) -> Result<Trajectory> {
        if k == 0 || k > self.dim {
            return Err(Error::invalid(format!(
                "cannot keep {k} of {} coordinates",
                self.dim
            )));
        }
        let mut out = Trajectory::with_capacity(k, self.len());
        for s in self.states() {
            out.data.extend_from_slice(&s[..k]);
        }
        Ok(out)
    }

    /// Values of a single coordinate over time.
    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.states().map(|s| s[j]).collect()
    }

    /// Frobenius norm of all stacked states.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// `‖truth − estimate‖_F / ‖truth‖_F` for equally shaped trajectories.
pub fn relative_error(truth: &Trajectory, estimate: &Trajectory) -> Result<f64> {
    if truth.dim() != estimate.dim() || truth.len() != estimate.len() {
        return Err(Error::invalid(format!(
            "shape mismatch: {}x{} vs {}x{}",
            truth.len(),
            truth.dim(),
            estimate.len(),
            estimate.dim()
        )));
    }
    let diff: f64 = truth
        .as_flat()
        .iter()
        .zip(estimate.as_flat())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / truth.frobenius_norm())
}
