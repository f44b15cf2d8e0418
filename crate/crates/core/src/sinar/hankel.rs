use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Delay-stacked data matrices.
///
/// Column `c` of `stacked` is `[x_t; x_{t-1}; …; x_{t-p+1}]` (newest block
/// first) and column `c` of `next` is `x_{t+1}`. Columns are concatenated
/// over the source trajectories and never span two of them.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelData {
    pub m: usize,
    pub p: usize,
    pub stacked: DMatrix<f64>,
    pub next: DMatrix<f64>,
}

impl HankelData {
    pub fn n_columns(&self) -> usize {
        self.stacked.ncols()
    }
}

pub fn build_hankel(trajectories: &[Trajectory], p: usize) -> Result<HankelData> {
    if p == 0 {
        return Err(Error::invalid("memory depth must be at least 1"));
    }
    let first = trajectories
        .first()
        .ok_or_else(|| Error::invalid("no trajectories given"))?;
    let m = first.dim();
    let mut n = 0;
    for (i, t) in trajectories.iter().enumerate() {
        if t.dim() != m {
            return Err(Error::invalid(format!(
                "trajectory {i} has dimension {}, expected {m}",
                t.dim()
            )));
        }
        if t.len() < p + 1 {
            return Err(Error::invalid(format!(
                "trajectory {i} has {} states, needs at least {} for depth {p}",
                t.len(),
                p + 1
            )));
        }
        n += t.len() - p;
    }

    let mut stacked = DMatrix::zeros(m * p, n);
    let mut next = DMatrix::zeros(m, n);
    let mut col = 0;
    for traj in trajectories {
        for t in p - 1..traj.len() - 1 {
            for k in 0..p {
                let x = traj.state(t - k);
                for j in 0..m {
                    stacked[(k * m + j, col)] = x[j];
                }
            }
            for (j, v) in traj.state(t + 1).iter().enumerate() {
                next[(j, col)] = *v;
            }
            col += 1;
        }
    }
    Ok(HankelData { m, p, stacked, next })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: &[f64]) -> Trajectory {
        Trajectory::from_scalar(v)
    }

    #[test]
    fn depth_two_layout() {
        let h = build_hankel(&[scalar(&[0.0, 1.0, 2.0, 3.0, 4.0])], 2).unwrap();
        assert_eq!(h.n_columns(), 3);
        assert_eq!(h.stacked, DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 0.0, 1.0, 2.0]));
        assert_eq!(h.next, DMatrix::from_row_slice(1, 3, &[2.0, 3.0, 4.0]));
    }

    #[test]
    fn depth_one_is_plain_shift() {
        let t = Trajectory::from_states(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let h = build_hankel(&[t], 1).unwrap();
        assert_eq!(h.stacked, DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 4.0]));
        assert_eq!(h.next, DMatrix::from_row_slice(2, 2, &[3.0, 5.0, 4.0, 6.0]));
    }

    #[test]
    fn constant_trajectory_has_identical_columns() {
        let h = build_hankel(&[scalar(&[0.3; 6])], 3).unwrap();
        for c in 0..h.n_columns() {
            assert_eq!(h.stacked.column(c), h.stacked.column(0));
        }
    }

    #[test]
    fn columns_do_not_straddle_trajectories() {
        let h = build_hankel(&[scalar(&[0.0, 1.0, 2.0]), scalar(&[10.0, 11.0, 12.0, 13.0])], 2).unwrap();
        assert_eq!(h.n_columns(), 1 + 2);
        assert_eq!(h.stacked.column(1).as_slice(), &[11.0, 10.0]);
        assert_eq!(h.next[(0, 1)], 12.0);
    }

    #[test]
    fn short_trajectory_named_in_error() {
        let err = build_hankel(&[scalar(&[0.0, 1.0, 2.0]), scalar(&[1.0, 2.0])], 2).unwrap_err();
        assert!(err.to_string().contains("trajectory 1"), "{err}");
    }
}
