//! Closed-form expected macrodynamics.
//!
//! On a complete network the expected opinion percentages evolve by a
//! Markovian quadratic map. With three opinions the third percentage is
//! redundant and the map reduces to two coordinates, which is the structure
//! the opinion dictionary of the identification engine mirrors.

use crate::abm::AdaptionMatrix;
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

const SIMPLEX_TOL: f64 = 1e-9;

fn check_simplex(x: &[f64]) -> Result<()> {
    let sum: f64 = x.iter().sum();
    if x.iter().any(|v| !v.is_finite() || *v < -SIMPLEX_TOL) || (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::invalid(format!("{x:?} is not on the probability simplex")));
    }
    Ok(())
}

/// Expected percentages after one step on a complete network:
/// `x'_m = x_m + Σ_{k≠m} (α_{km} − α_{mk}) x_k x_m`.
pub fn expected_step_complete(x: &[f64], alpha: &AdaptionMatrix) -> Result<Vec<f64>> {
    if x.len() != alpha.n_opinions() {
        return Err(Error::invalid(format!(
            "state has {} opinions, adaption matrix {}",
            x.len(),
            alpha.n_opinions()
        )));
    }
    check_simplex(x)?;
    let m = x.len();
    Ok((0..m)
        .map(|i| {
            let flow: f64 = (0..m)
                .filter(|&k| k != i)
                .map(|k| (alpha.get(k, i) - alpha.get(i, k)) * x[k] * x[i])
                .sum();
            x[i] + flow
        })
        .collect())
}

/// Exact two-coordinate form of the three-opinion expected map.
///
/// Each row holds coefficients on `(x1, x2, x1², x2², x1·x2)`, the order of
/// the per-delay opinion dictionary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCoefficients {
    /// `α31 − α13`
    pub a: f64,
    /// `α21 − α12 − α31 + α13`
    pub b: f64,
    /// `α32 − α23`
    pub c: f64,
    /// `α12 − α21 − α32 + α23`
    pub d: f64,
}

impl ReducedCoefficients {
    pub fn rows(&self) -> [[f64; 5]; 2] {
        [
            [1.0 + self.a, 0.0, -self.a, 0.0, self.b],
            [0.0, 1.0 + self.c, 0.0, -self.c, self.d],
        ]
    }

    pub fn evaluate(&self, x1: f64, x2: f64) -> [f64; 2] {
        let features = [x1, x2, x1 * x1, x2 * x2, x1 * x2];
        let rows = self.rows();
        let dot = |r: &[f64; 5]| r.iter().zip(&features).map(|(c, f)| c * f).sum::<f64>();
        [dot(&rows[0]), dot(&rows[1])]
    }
}

pub fn reduce_m3(alpha: &AdaptionMatrix) -> Result<ReducedCoefficients> {
    if alpha.n_opinions() != 3 {
        return Err(Error::Unsupported(format!(
            "two-coordinate reduction needs 3 opinions, got {}",
            alpha.n_opinions()
        )));
    }
    let al = |i: usize, j: usize| alpha.get(i - 1, j - 1);
    Ok(ReducedCoefficients {
        a: al(3, 1) - al(1, 3),
        b: al(2, 1) - al(1, 2) - al(3, 1) + al(1, 3),
        c: al(3, 2) - al(2, 3),
        d: al(1, 2) - al(2, 1) - al(3, 2) + al(2, 3),
    })
}

/// One step of two uncoupled complete clusters of equal size, each given by
/// its first two percentages. Returns both new cluster states and their mean.
pub fn expected_step_two_cluster(
    x1: [f64; 2],
    x2: [f64; 2],
    coeffs: &ReducedCoefficients,
) -> ([f64; 2], [f64; 2], [f64; 2]) {
    let n1 = coeffs.evaluate(x1[0], x1[1]);
    let n2 = coeffs.evaluate(x2[0], x2[1]);
    let mean = [0.5 * (n1[0] + n2[0]), 0.5 * (n1[1] + n2[1])];
    (n1, n2, mean)
}

/// Deterministic uncoupled two-cluster evolution over `horizon` steps.
/// Returns the network-wide mean of the first two percentages, length
/// `horizon + 1`.
pub fn two_cluster_trajectory(
    x1: [f64; 2],
    x2: [f64; 2],
    alpha: &AdaptionMatrix,
    horizon: usize,
) -> Result<Trajectory> {
    for x in [x1, x2] {
        check_simplex(&[x[0], x[1], 1.0 - x[0] - x[1]])?;
    }
    let coeffs = reduce_m3(alpha)?;
    let mut traj = Trajectory::with_capacity(2, horizon + 1);
    let (mut a, mut b) = (x1, x2);
    traj.push(&[0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])])?;
    for _ in 0..horizon {
        let (na, nb, mean) = expected_step_two_cluster(a, b, &coeffs);
        a = na;
        b = nb;
        traj.push(&mean)?;
    }
    Ok(traj)
}

/// Iterates the complete-network expected map for `horizon` steps.
pub fn complete_trajectory(x0: &[f64], alpha: &AdaptionMatrix, horizon: usize) -> Result<Trajectory> {
    let mut traj = Trajectory::with_capacity(x0.len(), horizon + 1);
    let mut x = x0.to_vec();
    traj.push(&x)?;
    for _ in 0..horizon {
        x = expected_step_complete(&x, alpha)?;
        traj.push(&x)?;
    }
    Ok(traj)
}

/// AR(2) coefficients `(c1, c2)` with `x_{t+1} = c1 x_t + c2 x_{t−1}` for the
/// mean of two scalar linear systems with rates `lambda1`, `lambda2`.
///
/// These are the coefficients of the characteristic polynomial
/// `(z − λ1)(z − λ2)`; the mean of the two modes does not rescale them.
pub fn linear_two_cluster_ar2(lambda1: f64, lambda2: f64) -> (f64, f64) {
    (lambda1 + lambda2, -lambda1 * lambda2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_simplex(rng: &mut ChaCha8Rng) -> [f64; 3] {
        // Sorted-uniform spacings give a uniform point on the simplex.
        let mut u = [rng.random::<f64>(), rng.random::<f64>()];
        u.sort_by(f64::total_cmp);
        [u[0], u[1] - u[0], 1.0 - u[1]]
    }

    fn random_alpha(rng: &mut ChaCha8Rng) -> AdaptionMatrix {
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { 0.0 } else { rng.random() }).collect())
            .collect();
        AdaptionMatrix::new(&rows).unwrap()
    }

    #[test]
    fn symmetric_alpha_is_identity() {
        let alpha = AdaptionMatrix::new(&[
            vec![0.0, 0.2, 0.4],
            vec![0.2, 0.0, 0.7],
            vec![0.4, 0.7, 0.0],
        ])
        .unwrap();
        let x = [0.3, 0.5, 0.2];
        assert_eq!(expected_step_complete(&x, &alpha).unwrap(), x.to_vec());
    }

    #[test]
    fn vertices_are_fixed() {
        let alpha = AdaptionMatrix::reference();
        for m in 0..3 {
            let mut e = [0.0; 3];
            e[m] = 1.0;
            assert_eq!(expected_step_complete(&e, &alpha).unwrap(), e.to_vec());
        }
    }

    #[test]
    fn reference_point_by_hand() {
        let alpha = AdaptionMatrix::reference();
        let y = expected_step_complete(&[0.45, 0.1, 0.45], &alpha).unwrap();
        assert!((y[0] - 0.4712625).abs() < 1e-15);
        assert!((y[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn off_simplex_rejected() {
        let alpha = AdaptionMatrix::reference();
        assert!(expected_step_complete(&[0.5, 0.5, 0.5], &alpha).is_err());
    }

    #[test]
    fn reference_reduction() {
        let r = reduce_m3(&AdaptionMatrix::reference()).unwrap();
        let rows = r.rows();
        let expect = [[1.135, 0.0, -0.135, 0.0, -0.27], [0.0, 0.865, 0.0, 0.135, 0.27]];
        for (row, want) in rows.iter().zip(&expect) {
            for (c, w) in row.iter().zip(want) {
                assert!((c - w).abs() < 1e-15, "{c} vs {w}");
            }
        }
    }

    #[test]
    fn zero_alpha_reduces_to_identity() {
        let r = reduce_m3(&AdaptionMatrix::new(&vec![vec![0.0; 3]; 3]).unwrap()).unwrap();
        assert_eq!(r.rows(), [[1.0, 0.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0, 0.0]]);
    }

    #[test]
    fn reduction_requires_three_opinions() {
        let alpha = AdaptionMatrix::new(&[vec![0.0, 0.1], vec![0.2, 0.0]]).unwrap();
        assert!(matches!(reduce_m3(&alpha), Err(Error::Unsupported(_))));
    }

    #[test]
    fn reduction_matches_full_map_and_preserves_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..1000 {
            let alpha = random_alpha(&mut rng);
            let x = random_simplex(&mut rng);
            let full = expected_step_complete(&x, &alpha).unwrap();
            let red = reduce_m3(&alpha).unwrap().evaluate(x[0], x[1]);
            assert!((full[0] - red[0]).abs() <= 1e-14);
            assert!((full[1] - red[1]).abs() <= 1e-14);
            assert!((full.iter().sum::<f64>() - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn equal_clusters_follow_single_network() {
        let alpha = AdaptionMatrix::reference();
        let two = two_cluster_trajectory([0.45, 0.1], [0.45, 0.1], &alpha, 50).unwrap();
        let one = complete_trajectory(&[0.45, 0.1, 0.45], &alpha, 50).unwrap();
        for t in 0..=50 {
            assert!((two.state(t)[0] - one.state(t)[0]).abs() < 1e-14);
            assert!((two.state(t)[1] - one.state(t)[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn vertex_cluster_stays_put() {
        let coeffs = reduce_m3(&AdaptionMatrix::reference()).unwrap();
        let (mut a, mut b) = ([1.0, 0.0], [0.3, 0.3]);
        for _ in 0..20 {
            let (na, nb, _) = expected_step_two_cluster(a, b, &coeffs);
            a = na;
            b = nb;
        }
        assert_eq!(a, [1.0, 0.0]);
        assert_ne!(b, [0.3, 0.3]);
    }

    fn check_recurrence(l1: f64, l2: f64, a0: f64, b0: f64, steps: usize) {
        let (c1, c2) = linear_two_cluster_ar2(l1, l2);
        let (mut u, mut v) = (a0, b0);
        let mut x = vec![0.5 * (u + v)];
        for _ in 0..steps {
            u *= l1;
            v *= l2;
            x.push(0.5 * (u + v));
        }
        for t in 1..steps {
            let pred = c1 * x[t] + c2 * x[t - 1];
            assert!((pred - x[t + 1]).abs() <= 1e-12, "t={t}: {pred} vs {}", x[t + 1]);
        }
    }

    #[test]
    fn ar2_closed_form_examples() {
        assert_eq!(linear_two_cluster_ar2(0.7, 0.7), (1.4, -0.48999999999999994));
        let (c1, c2) = linear_two_cluster_ar2(0.9, 0.5);
        assert!((c1 - 1.4).abs() < 1e-15 && (c2 + 0.45).abs() < 1e-15);
        assert_eq!(linear_two_cluster_ar2(0.6, 0.0), (0.6, -0.0));
        check_recurrence(0.9, 0.5, 1.0, 2.0, 50);
        check_recurrence(0.7, 0.7, 1.0, 1.0, 50);
    }

    #[test]
    fn ar2_recurrence_random_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let l1 = rng.random_range(-1.0..1.0);
            let l2 = rng.random_range(-1.0..1.0);
            check_recurrence(l1, l2, rng.random(), rng.random(), 60);
        }
    }

    #[test]
    fn halved_coefficients_do_not_satisfy_recurrence() {
        let (l1, l2): (f64, f64) = (0.9, 0.5);
        let x = |t: i32| 0.5 * (l1.powi(t) + 2.0 * l2.powi(t));
        let halved = 0.5 * (l1 + l2) * x(5) - 0.5 * l1 * l2 * x(4);
        assert!((halved - x(6)).abs() > 1e-2);
    }
}
