//! Ready-made experiment setups: the three opinion-dynamics network cases
//! and the deterministic two-cluster studies.

use crate::abm::{simulate, AdaptionMatrix, Ensemble, InitialCondition};
use crate::error::{Error, Result};
use crate::macrodynamics::{linear_two_cluster_ar2, two_cluster_trajectory};
use crate::network::Network;
use crate::sinar::{build_hankel, fit, Dictionary, NarModel};
use crate::trajectory::{relative_error, Trajectory};
use crate::validation::{memory_sweep, one_step_error, split_realisations, SweepResult};

/// Mixed into the experiment seed to obtain the network seed, so the graph
/// and the realisation streams never share a ChaCha8 stream.
const NETWORK_SEED_SALT: u64 = 0x6e65_7477_6f72_6b00;

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkSpec {
    Complete { n_agents: usize },
    Clustered { n_agents: usize, n_clusters: usize, p_between: f64 },
}

impl NetworkSpec {
    pub fn n_agents(&self) -> usize {
        match self {
            NetworkSpec::Complete { n_agents } | NetworkSpec::Clustered { n_agents, .. } => *n_agents,
        }
    }

    pub fn build(&self, seed: u64) -> Result<Network> {
        match *self {
            NetworkSpec::Complete { n_agents } => Network::complete(n_agents),
            NetworkSpec::Clustered {
                n_agents,
                n_clusters,
                p_between,
            } => Network::clustered(n_agents, n_clusters, p_between, seed ^ NETWORK_SEED_SALT),
        }
    }
}

/// A full simulate → fit → validate setup for the agent-based model.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionExperiment {
    pub network: NetworkSpec,
    pub alpha: AdaptionMatrix,
    pub initial: InitialCondition,
    pub horizon: usize,
    pub realisations: usize,
    pub train: usize,
    pub block_len: usize,
    pub seed: u64,
}

impl OpinionExperiment {
    /// Complete network of 5000 agents.
    pub fn case1(seed: u64) -> OpinionExperiment {
        OpinionExperiment {
            network: NetworkSpec::Complete { n_agents: 5000 },
            alpha: AdaptionMatrix::reference(),
            initial: InitialCondition::Percentages(vec![0.45, 0.1, 0.45]),
            horizon: 300,
            realisations: 20,
            train: 12,
            block_len: 40,
            seed,
        }
    }

    /// Two clusters of 2500 agents.
    pub fn case2(seed: u64) -> OpinionExperiment {
        OpinionExperiment {
            network: NetworkSpec::Clustered {
                n_agents: 5000,
                n_clusters: 2,
                p_between: 1e-4,
            },
            alpha: AdaptionMatrix::reference(),
            initial: InitialCondition::PerCluster(vec![vec![0.8, 0.1, 0.1], vec![0.1, 0.1, 0.8]]),
            horizon: 500,
            realisations: 20,
            train: 12,
            block_len: 20,
            seed,
        }
    }

    /// Five clusters of 1000 agents.
    pub fn case3(seed: u64) -> OpinionExperiment {
        OpinionExperiment {
            network: NetworkSpec::Clustered {
                n_agents: 5000,
                n_clusters: 5,
                p_between: 1e-4,
            },
            alpha: AdaptionMatrix::reference(),
            initial: InitialCondition::PerCluster(vec![
                vec![0.8, 0.1, 0.1],
                vec![0.1, 0.1, 0.8],
                vec![0.1, 0.8, 0.1],
                vec![0.3, 0.4, 0.3],
                vec![0.5, 0.3, 0.2],
            ]),
            horizon: 500,
            realisations: 20,
            train: 12,
            block_len: 20,
            seed,
        }
    }

    pub fn preset(name: &str, seed: u64) -> Result<OpinionExperiment> {
        match name {
            "case1" => Ok(Self::case1(seed)),
            "case2" => Ok(Self::case2(seed)),
            "case3" => Ok(Self::case3(seed)),
            other => Err(Error::invalid(format!("unknown preset `{other}` (case1, case2, case3)"))),
        }
    }

    pub fn simulate(&self, keep_micro: bool) -> Result<Ensemble> {
        let net = self.network.build(self.seed)?;
        simulate(
            &net,
            &self.alpha,
            &self.initial,
            self.horizon,
            self.realisations,
            self.seed,
            keep_micro,
        )
    }

    /// The modelled observables: all but the last opinion percentage.
    pub fn observed(&self, ensemble: &Ensemble) -> Result<Vec<Trajectory>> {
        let keep = self.alpha.n_opinions() - 1;
        ensemble
            .macro_trajectories
            .iter()
            .map(|t| t.leading_coordinates(keep))
            .collect()
    }

    /// Simulates and runs the memory sweep with the opinion dictionary.
    pub fn sweep(&self, p_values: &[usize], lambdas: &[f64]) -> Result<SweepResult> {
        if self.alpha.n_opinions() != 3 {
            return Err(Error::Unsupported("the opinion dictionary is defined for three opinions".into()));
        }
        let ensemble = self.simulate(false)?;
        let observed = self.observed(&ensemble)?;
        let (train, validate) = split_realisations(&observed, self.train)?;
        memory_sweep(train, validate, Dictionary::opinion, p_values, lambdas, self.block_len)
    }
}

/// Initial cluster states of the deterministic two-cluster study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TwoClusterVariant {
    /// Mirror-symmetric start: (0.8, 0.1) and (0.1, 0.8).
    Symmetric,
    /// (0.7, 0.2) and (0.1, 0.8).
    NonSymmetric,
}

impl TwoClusterVariant {
    pub fn initial_states(self) -> ([f64; 2], [f64; 2]) {
        match self {
            TwoClusterVariant::Symmetric => ([0.8, 0.1], [0.1, 0.8]),
            TwoClusterVariant::NonSymmetric => ([0.7, 0.2], [0.1, 0.8]),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TwoClusterFit {
    pub p: usize,
    pub model: NarModel,
    pub one_step_error: f64,
    /// Relative error of the free rollout over the held-out steps, `None`
    /// if it diverged.
    pub rollout_error: Option<f64>,
    pub rollout: Option<Trajectory>,
}

#[derive(Debug, Clone)]
pub struct TwoClusterStudy {
    pub truth: Trajectory,
    pub train_len: usize,
    pub fits: Vec<TwoClusterFit>,
}

/// Fits NAR models (λ = 0, opinion dictionary) of every depth in `p_values`
/// to the first `train_steps + 1` states of the deterministic uncoupled
/// two-cluster mean, then scores them on the remaining steps.
pub fn two_cluster_study(
    variant: TwoClusterVariant,
    alpha: &AdaptionMatrix,
    horizon: usize,
    train_steps: usize,
    p_values: &[usize],
) -> Result<TwoClusterStudy> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be positive"));
    }
    if train_steps >= horizon {
        return Err(Error::invalid(format!(
            "training steps {train_steps} leave nothing to validate within horizon {horizon}"
        )));
    }
    let (x1, x2) = variant.initial_states();
    let truth = two_cluster_trajectory(x1, x2, alpha, horizon)?;
    let train = truth.slice(0..train_steps + 1);
    let held_out = truth.slice(train_steps + 1..truth.len());
    let fits = p_values
        .iter()
        .map(|&p| {
            let model = fit(&build_hankel(std::slice::from_ref(&train), p)?, &Dictionary::opinion(p)?, 0.0)?;
            let one_step = one_step_error(&model, &held_out_with_history(&truth, train_steps, p))?;
            let (rollout_error, rollout) = match model.rollout(&train, held_out.len()) {
                Ok(pred) => (Some(relative_error(&held_out, &pred)?), Some(pred)),
                Err(Error::Diverged { .. }) => (None, None),
                Err(e) => return Err(e),
            };
            Ok(TwoClusterFit {
                p,
                model,
                one_step_error: one_step,
                rollout_error,
                rollout,
            })
        })
        .collect::<Result<_>>()?;
    Ok(TwoClusterStudy {
        truth,
        train_len: train_steps + 1,
        fits,
    })
}

/// Held-out states preceded by the `p` states needed to predict the first.
fn held_out_with_history(truth: &Trajectory, train_steps: usize, p: usize) -> Trajectory {
    truth.slice(train_steps + 1 - p.min(train_steps + 1)..truth.len())
}

/// Mean of two scalar linear processes `x_{t+1} = λ_i x_t`.
pub fn linear_two_cluster_series(l1: f64, l2: f64, x1: f64, x2: f64, horizon: usize) -> Trajectory {
    let mut series = Vec::with_capacity(horizon + 1);
    let (mut a, mut b) = (x1, x2);
    for _ in 0..=horizon {
        series.push(0.5 * (a + b));
        a *= l1;
        b *= l2;
    }
    Trajectory::from_scalar(&series)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearStudy {
    pub fitted: [f64; 2],
    pub analytic: [f64; 2],
    pub max_recurrence_residual: f64,
}

/// Fits a linear AR(2) model to the mean of two linear clusters and compares
/// it with the analytic recurrence.
pub fn linear_two_cluster_study(l1: f64, l2: f64, x1: f64, x2: f64, horizon: usize) -> Result<LinearStudy> {
    if horizon < 4 {
        return Err(Error::invalid("horizon too short to fit an AR(2) model"));
    }
    let series = linear_two_cluster_series(l1, l2, x1, x2, horizon);
    let (c1, c2) = linear_two_cluster_ar2(l1, l2);
    let x = series.coordinate(0);
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let max_recurrence_residual = (2..x.len())
        .map(|t| (x[t] - c1 * x[t - 1] - c2 * x[t - 2]).abs() / scale)
        .fold(0.0, f64::max);
    let model = fit(&build_hankel(&[series], 2)?, &Dictionary::linear(1, 2)?, 0.0)?;
    Ok(LinearStudy {
        fitted: [model.xi[(0, 0)], model.xi[(0, 1)]],
        analytic: [c1, c2],
        max_recurrence_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_consistent() {
        for name in ["case1", "case2", "case3"] {
            let e = OpinionExperiment::preset(name, 1).unwrap();
            assert_eq!(e.network.n_agents(), 5000);
            assert!(e.train < e.realisations);
        }
        assert!(OpinionExperiment::preset("case4", 1).is_err());
    }

    #[test]
    fn small_ensemble_shapes() {
        let mut e = OpinionExperiment::case2(5);
        e.network = NetworkSpec::Clustered {
            n_agents: 200,
            n_clusters: 2,
            p_between: 0.01,
        };
        e.horizon = 10;
        e.realisations = 3;
        let ens = e.simulate(false).unwrap();
        let obs = e.observed(&ens).unwrap();
        assert_eq!(obs.len(), 3);
        assert_eq!(obs[0].dim(), 2);
        assert_eq!(obs[0].len(), 11);
    }

    #[test]
    fn linear_study_recovers_recurrence() {
        let s = linear_two_cluster_study(0.9, -0.5, 1.0, 0.3, 60).unwrap();
        assert!(s.max_recurrence_residual < 1e-12);
        for (a, b) in s.fitted.iter().zip(s.analytic) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn two_cluster_study_rejects_degenerate_horizon() {
        let a = AdaptionMatrix::reference();
        assert!(two_cluster_study(TwoClusterVariant::Symmetric, &a, 0, 0, &[2]).is_err());
        assert!(two_cluster_study(TwoClusterVariant::Symmetric, &a, 10, 10, &[2]).is_err());
    }
}
