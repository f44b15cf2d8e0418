//! Stochastic opinion-change microdynamics on a network.
//!
//! Every step, each agent picks one neighbour uniformly at random (itself
//! included) and adopts that neighbour's opinion with the adaption
//! probability for the pair (own opinion, neighbour opinion). All agents
//! update synchronously from the time-t state, and the random input of a
//! step ([`StepNoise`]) is drawn without looking at the state.
//!
//! Opinions are 0-based in this crate (`0..M`); CSV exports are 1-based.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::Network;
use crate::trajectory::Trajectory;

/// Stream id reserved for sampling initial states.
const INIT_STREAM: u64 = u64::MAX;

/// Tolerance for probability vectors supplied as initial conditions.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Probabilities `alpha[from][to]` that an agent holding `from` adopts a
/// neighbour's opinion `to`. Diagonal entries are stored as 0 and never read.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptionMatrix {
    m: usize,
    alpha: Vec<f64>,
}

impl AdaptionMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<AdaptionMatrix> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::invalid("adaption matrix needs at least one opinion"));
        }
        if m > u16::MAX as usize {
            return Err(Error::invalid(format!("{m} opinions is too many")));
        }
        let mut alpha = vec![0.0; m * m];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::invalid(format!(
                    "row {} has {} entries, expected {m}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::invalid(format!(
                        "alpha[{}][{}] = {v} is not a probability",
                        i + 1,
                        j + 1
                    )));
                }
                if i != j {
                    alpha[i * m + j] = v;
                }
            }
        }
        Ok(AdaptionMatrix { m, alpha })
    }

    /// The three-opinion cyclic matrix used by all opinion experiments:
    /// strong drift 1→2→3→1 (0.165) against weak reverse drift (0.03).
    pub fn reference() -> AdaptionMatrix {
        AdaptionMatrix::new(&[
            vec![0.0, 0.165, 0.03],
            vec![0.03, 0.0, 0.165],
            vec![0.165, 0.03, 0.0],
        ])
        .expect("reference matrix is valid")
    }

    pub fn n_opinions(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.alpha[from * self.m + to]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.alpha.chunks(self.m).map(|r| r.to_vec()).collect()
    }

    /// Whether `alpha[i][j] == alpha[j][i]` for every pair.
    pub fn is_symmetric(&self) -> bool {
        (0..self.m).all(|i| (0..self.m).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Parses an M×M comma-separated matrix without header. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse_csv(text: &str) -> Result<AdaptionMatrix> {
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::parse(lineno + 1, format!("not a number: {:?}", f.trim())))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
            if rows.len() > u16::MAX as usize {
                return Err(Error::parse(lineno + 1, "too many rows"));
            }
        }
        AdaptionMatrix::new(&rows)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }
}

/// Opinion of every agent at one time step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MicroState {
    opinions: Vec<u16>,
    n_opinions: usize,
}

impl MicroState {
    pub fn new(opinions: Vec<u16>, n_opinions: usize) -> Result<MicroState> {
        if opinions.is_empty() {
            return Err(Error::invalid("micro state needs at least one agent"));
        }
        if let Some(bad) = opinions.iter().find(|&&o| o as usize >= n_opinions) {
            return Err(Error::invalid(format!(
                "opinion {bad} outside 0..{n_opinions}"
            )));
        }
        Ok(MicroState {
            opinions,
            n_opinions,
        })
    }

    /// Everybody holds `opinion`.
    pub fn consensus(n_agents: usize, opinion: u16, n_opinions: usize) -> Result<MicroState> {
        MicroState::new(vec![opinion; n_agents], n_opinions)
    }

    pub fn n_agents(&self) -> usize {
        self.opinions.len()
    }

    pub fn n_opinions(&self) -> usize {
        self.n_opinions
    }

    pub fn opinions(&self) -> &[u16] {
        &self.opinions
    }

    pub fn opinion(&self, agent: usize) -> usize {
        self.opinions[agent] as usize
    }

    pub fn is_consensus(&self) -> bool {
        self.opinions.iter().all(|&o| o == self.opinions[0])
    }
}

/// Opinion percentages: component m is the fraction of agents holding m.
pub fn observe(state: &MicroState) -> Vec<f64> {
    let mut counts = vec![0usize; state.n_opinions];
    for &o in &state.opinions {
        counts[o as usize] += 1;
    }
    let n = state.n_agents() as f64;
    counts.into_iter().map(|c| c as f64 / n).collect()
}

/// Percentages restricted to a subset of agents.
pub fn observe_agents(state: &MicroState, agents: std::ops::Range<usize>) -> Vec<f64> {
    let mut counts = vec![0usize; state.n_opinions];
    let n = agents.len() as f64;
    for &o in &state.opinions[agents] {
        counts[o as usize] += 1;
    }
    counts.into_iter().map(|c| c as f64 / n).collect()
}

/// The random input of one step: for every agent the slot of the chosen
/// neighbour (see [`Network::neighbor`]) and a uniform number in `[0, 1)`.
#[derive(Debug, Clone, Default)]
pub struct StepNoise {
    pub neighbor_slot: Vec<u32>,
    pub uniform: Vec<f64>,
}

impl StepNoise {
    /// Draws the noise for one step. Consumes exactly one neighbour draw and
    /// one uniform per agent, in agent order, whatever the current state.
    pub fn draw<R: Rng + ?Sized>(net: &Network, rng: &mut R) -> StepNoise {
        let mut noise = StepNoise::default();
        noise.redraw(net, rng);
        noise
    }

    pub fn redraw<R: Rng + ?Sized>(&mut self, net: &Network, rng: &mut R) {
        let n = net.n_agents();
        self.neighbor_slot.clear();
        self.uniform.clear();
        self.neighbor_slot.reserve(n);
        self.uniform.reserve(n);
        for i in 0..n {
            let k = rng.random_range(0..net.degree(i) as u32);
            self.neighbor_slot.push(k);
            self.uniform.push(rng.random::<f64>());
        }
    }
}

fn check_compatible(state: &MicroState, net: &Network, alpha: &AdaptionMatrix) -> Result<()> {
    if state.n_agents() != net.n_agents() {
        return Err(Error::invalid(format!(
            "state has {} agents, network has {}",
            state.n_agents(),
            net.n_agents()
        )));
    }
    if state.n_opinions != alpha.n_opinions() {
        return Err(Error::invalid(format!(
            "state uses {} opinions, adaption matrix has {}",
            state.n_opinions,
            alpha.n_opinions()
        )));
    }
    Ok(())
}

/// Deterministic update map: the next state given the current one and the
/// step noise.
pub fn apply_noise(
    state: &MicroState,
    net: &Network,
    alpha: &AdaptionMatrix,
    noise: &StepNoise,
    next: &mut Vec<u16>,
) {
    let x = &state.opinions;
    next.clear();
    next.extend(x.iter().enumerate().map(|(i, &own)| {
        let j = net.neighbor(i, noise.neighbor_slot[i] as usize);
        let other = x[j];
        if noise.uniform[i] < alpha.get(own as usize, other as usize) {
            other
        } else {
            own
        }
    }));
}

/// One synchronous step of the opinion-change dynamics.
pub fn step<R: Rng + ?Sized>(
    state: &MicroState,
    net: &Network,
    alpha: &AdaptionMatrix,
    rng: &mut R,
) -> Result<MicroState> {
    check_compatible(state, net, alpha)?;
    let noise = StepNoise::draw(net, rng);
    let mut next = Vec::with_capacity(state.n_agents());
    apply_noise(state, net, alpha, &noise, &mut next);
    Ok(MicroState {
        opinions: next,
        n_opinions: state.n_opinions,
    })
}

/// Probability that `agent` holds `target` after one step.
pub fn transition_probability(
    state: &MicroState,
    net: &Network,
    alpha: &AdaptionMatrix,
    agent: usize,
    target: usize,
) -> Result<f64> {
    check_compatible(state, net, alpha)?;
    if agent >= state.n_agents() {
        return Err(Error::invalid(format!("agent {agent} out of range")));
    }
    if target >= state.n_opinions {
        return Err(Error::invalid(format!("opinion {target} out of range")));
    }
    let own = state.opinion(agent);
    let mut counts = vec![0usize; state.n_opinions];
    for j in net.neighbors(agent) {
        counts[state.opinion(j)] += 1;
    }
    let degree = net.degree(agent) as f64;
    let switch = |to: usize| alpha.get(own, to) * counts[to] as f64 / degree;
    if target != own {
        Ok(switch(target))
    } else {
        let leave: f64 = (0..state.n_opinions).filter(|&m| m != own).map(switch).sum();
        Ok(1.0 - leave)
    }
}

/// How the initial micro state is constructed.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Explicit(MicroState),
    /// Exact counts matching the target percentages (rounded to nearest,
    /// the opinion with the largest target absorbing the rounding slack),
    /// assigned to contiguous runs of agents.
    Percentages(Vec<f64>),
    /// Opinions drawn i.i.d. per agent from its cluster's distribution.
    PerCluster(Vec<Vec<f64>>),
}

fn check_distribution(p: &[f64], m: usize, what: &str) -> Result<()> {
    if p.len() != m {
        return Err(Error::invalid(format!(
            "{what} has {} entries, expected {m}",
            p.len()
        )));
    }
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid(format!("{what} has negative or non-finite entries")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::invalid(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

impl InitialCondition {
    /// Builds the initial state. Only [`InitialCondition::PerCluster`]
    /// consumes randomness.
    pub fn realize<R: Rng + ?Sized>(
        &self,
        net: &Network,
        n_opinions: usize,
        rng: &mut R,
    ) -> Result<MicroState> {
        let n = net.n_agents();
        match self {
            InitialCondition::Explicit(s) => {
                if s.n_agents() != n || s.n_opinions != n_opinions {
                    return Err(Error::invalid("explicit initial state does not fit the network"));
                }
                Ok(s.clone())
            }
            InitialCondition::Percentages(p) => {
                check_distribution(p, n_opinions, "initial percentages")?;
                let mut counts: Vec<i64> = p.iter().map(|v| (v * n as f64).round() as i64).collect();
                let slack = n as i64 - counts.iter().sum::<i64>();
                let largest = p
                    .iter()
                    .enumerate()
                    .fold(0, |best, (i, v)| if *v > p[best] { i } else { best });
                counts[largest] += slack;
                if counts[largest] < 0 {
                    return Err(Error::invalid("percentages cannot be realised with this many agents"));
                }
                let mut opinions = Vec::with_capacity(n);
                for (m, &c) in counts.iter().enumerate() {
                    opinions.extend(std::iter::repeat_n(m as u16, c as usize));
                }
                MicroState::new(opinions, n_opinions)
            }
            InitialCondition::PerCluster(dists) => {
                let k = net
                    .n_clusters()
                    .ok_or_else(|| Error::invalid("per-cluster initial condition needs a clustered network"))?;
                if dists.len() != k {
                    return Err(Error::invalid(format!(
                        "{} cluster distributions given for {k} clusters",
                        dists.len()
                    )));
                }
                for (c, d) in dists.iter().enumerate() {
                    check_distribution(d, n_opinions, &format!("cluster {} distribution", c + 1))?;
                }
                let opinions = (0..n)
                    .map(|i| {
                        let d = &dists[net.cluster_of(i).expect("clustered")];
                        let u: f64 = rng.random();
                        let mut acc = 0.0;
                        let mut pick = n_opinions - 1;
                        for (m, &pm) in d.iter().enumerate() {
                            acc += pm;
                            if u < acc {
                                pick = m;
                                break;
                            }
                        }
                        pick as u16
                    })
                    .collect();
                MicroState::new(opinions, n_opinions)
            }
        }
    }
}

/// Output of [`simulate`].
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub initial: MicroState,
    /// One percentage trajectory of length `horizon + 1` per realisation.
    pub macro_trajectories: Vec<Trajectory>,
    /// Full micro trajectories, when requested.
    pub micro_trajectories: Option<Vec<Vec<MicroState>>>,
}

/// Runs `n_realisations` independent realisations from one shared initial
/// state. Realisation `r` draws from ChaCha8 stream `r` of `seed`, so each is
/// reproducible on its own and realisations can run in parallel.
pub fn simulate(
    net: &Network,
    alpha: &AdaptionMatrix,
    init: &InitialCondition,
    horizon: usize,
    n_realisations: usize,
    seed: u64,
    keep_micro: bool,
) -> Result<Ensemble> {
    let mut init_rng = ChaCha8Rng::seed_from_u64(seed);
    init_rng.set_stream(INIT_STREAM);
    let initial = init.realize(net, alpha.n_opinions(), &mut init_rng)?;
    check_compatible(&initial, net, alpha)?;

    let runs: Vec<(Trajectory, Option<Vec<MicroState>>)> = (0..n_realisations)
        .into_par_iter()
        .map(|r| run_realisation(net, alpha, &initial, horizon, seed, r as u64, keep_micro))
        .collect();

    let mut macro_trajectories = Vec::with_capacity(n_realisations);
    let mut micro = keep_micro.then(|| Vec::with_capacity(n_realisations));
    for (traj, states) in runs {
        macro_trajectories.push(traj);
        if let (Some(all), Some(states)) = (micro.as_mut(), states) {
            all.push(states);
        }
    }
    Ok(Ensemble {
        initial,
        macro_trajectories,
        micro_trajectories: micro,
    })
}

fn run_realisation(
    net: &Network,
    alpha: &AdaptionMatrix,
    initial: &MicroState,
    horizon: usize,
    seed: u64,
    stream: u64,
    keep_micro: bool,
) -> (Trajectory, Option<Vec<MicroState>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut traj = Trajectory::with_capacity(alpha.n_opinions(), horizon + 1);
    let mut micro = keep_micro.then(|| Vec::with_capacity(horizon + 1));
    let mut state = initial.clone();
    let mut noise = StepNoise::default();
    let mut next = Vec::with_capacity(state.n_agents());
    traj.push(&observe(&state)).expect("dimension");
    for _ in 0..horizon {
        noise.redraw(net, &mut rng);
        apply_noise(&state, net, alpha, &noise, &mut next);
        if let Some(m) = micro.as_mut() {
            m.push(state.clone());
        }
        std::mem::swap(&mut state.opinions, &mut next);
        traj.push(&observe(&state)).expect("dimension");
    }
    if let Some(m) = micro.as_mut() {
        m.push(state);
    }
    (traj, micro)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line3() -> Network {
        Network::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn all_ones(m: usize) -> AdaptionMatrix {
        AdaptionMatrix::new(&vec![vec![1.0; m]; m]).unwrap()
    }

    #[test]
    fn diagonal_is_stored_as_zero() {
        let a = all_ones(3);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.get(0, 1), 1.0);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(AdaptionMatrix::new(&[vec![0.0, 1.2], vec![0.0, 0.0]]).is_err());
        assert!(AdaptionMatrix::new(&[vec![0.0, 0.1]]).is_err());
        assert!(AdaptionMatrix::parse_csv("0,0.1\n0.2,zero\n").is_err());
    }

    #[test]
    fn alpha_csv_roundtrip() {
        let a = AdaptionMatrix::reference();
        assert_eq!(AdaptionMatrix::parse_csv(&a.to_csv()).unwrap(), a);
    }

    #[test]
    fn observe_counts() {
        let s = MicroState::new(vec![0, 0, 1, 2], 3).unwrap();
        assert_eq!(observe(&s), vec![0.5, 0.25, 0.25]);
        let c = MicroState::consensus(7, 1, 3).unwrap();
        assert_eq!(observe(&c), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn reference_initial_percentages_are_exact() {
        let net = Network::complete(5000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = InitialCondition::Percentages(vec![0.45, 0.1, 0.45])
            .realize(&net, 3, &mut rng)
            .unwrap();
        assert_eq!(observe(&s), vec![0.45, 0.1, 0.45]);
    }

    #[test]
    fn percentages_off_simplex_rejected() {
        let net = Network::complete(10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = InitialCondition::Percentages(vec![0.5, 0.6, 0.0]).realize(&net, 3, &mut rng);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn consensus_is_absorbing() {
        let net = Network::clustered(20, 2, 0.3, 1).unwrap();
        let alpha = all_ones(3);
        let s = MicroState::consensus(20, 0, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let next = step(&s, &net, &alpha, &mut rng).unwrap();
        assert_eq!(next, s);
    }

    #[test]
    fn mismatched_sizes_rejected() {
        let net = Network::complete(3).unwrap();
        let s = MicroState::consensus(4, 0, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(step(&s, &net, &all_ones(2), &mut rng).is_err());
    }

    #[test]
    fn two_agent_swap_frequency() {
        // Exact: each agent independently picks the other with prob 1/2 and
        // then always adopts, so P[(1,2) -> (2,1)] = 1/4.
        let net = Network::complete(2).unwrap();
        let alpha = all_ones(2);
        let s = MicroState::new(vec![0, 1], 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| step(&s, &net, &alpha, &mut rng).unwrap().opinions() == [1, 0])
            .count();
        let p = 0.25;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        let freq = hits as f64 / trials as f64;
        assert!((freq - p).abs() < 3.0 * sigma, "freq {freq}");
    }

    #[test]
    fn line_graph_endpoint_switch_frequency() {
        let net = line3();
        let alpha = all_ones(2);
        let s = MicroState::new(vec![0, 0, 1], 2).unwrap();
        assert_eq!(transition_probability(&s, &net, &alpha, 2, 0).unwrap(), 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| step(&s, &net, &alpha, &mut rng).unwrap().opinion(2) == 0)
            .count();
        let sigma = (0.25f64 / trials as f64).sqrt();
        assert!((hits as f64 / trials as f64 - 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn transition_probability_consensus_and_complete() {
        let alpha = AdaptionMatrix::reference();
        let net = Network::complete(10).unwrap();
        let c = MicroState::consensus(10, 2, 3).unwrap();
        assert_eq!(transition_probability(&c, &net, &alpha, 4, 2).unwrap(), 1.0);

        let s = MicroState::new(vec![0, 0, 0, 0, 1, 1, 2, 2, 2, 2], 3).unwrap();
        let x = observe(&s);
        for agent in [0, 5, 9] {
            let own = s.opinion(agent);
            for to in 0..3 {
                if to == own {
                    continue;
                }
                let p = transition_probability(&s, &net, &alpha, agent, to).unwrap();
                assert!((p - alpha.get(own, to) * x[to]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn transition_probabilities_sum_to_one() {
        let alpha = AdaptionMatrix::reference();
        let net = Network::clustered(12, 3, 0.4, 2).unwrap();
        let s = MicroState::new((0..12).map(|i| (i % 3) as u16).collect(), 3).unwrap();
        for agent in 0..12 {
            let total: f64 = (0..3)
                .map(|m| transition_probability(&s, &net, &alpha, agent, m).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_horizon_gives_initial_observation() {
        let net = Network::complete(100).unwrap();
        let init = InitialCondition::Percentages(vec![0.45, 0.1, 0.45]);
        let ens = simulate(&net, &AdaptionMatrix::reference(), &init, 0, 2, 5, false).unwrap();
        for t in &ens.macro_trajectories {
            assert_eq!(t.len(), 1);
            assert_eq!(t.state(0), observe(&ens.initial).as_slice());
        }
    }

    #[test]
    fn simulation_is_reproducible_and_on_simplex() {
        let net = Network::clustered(200, 2, 0.01, 4).unwrap();
        let init = InitialCondition::PerCluster(vec![vec![0.8, 0.1, 0.1], vec![0.1, 0.1, 0.8]]);
        let alpha = AdaptionMatrix::reference();
        let a = simulate(&net, &alpha, &init, 30, 3, 99, true).unwrap();
        let b = simulate(&net, &alpha, &init, 30, 3, 99, false).unwrap();
        assert_eq!(a.macro_trajectories, b.macro_trajectories);
        assert_ne!(a.macro_trajectories[0], a.macro_trajectories[1]);
        for t in &a.macro_trajectories {
            for s in t.states() {
                assert!(s.iter().all(|v| *v >= 0.0));
                assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
        let micro = a.micro_trajectories.unwrap();
        assert_eq!(micro[1].len(), 31);
        assert_eq!(observe(&micro[1][17]), a.macro_trajectories[1].state(17));
    }

    #[test]
    fn per_cluster_requires_clusters() {
        let net = Network::complete(10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let init = InitialCondition::PerCluster(vec![vec![1.0, 0.0]]);
        assert!(init.realize(&net, 2, &mut rng).is_err());
    }
}
