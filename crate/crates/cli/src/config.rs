//! Experiment configuration: a TOML file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sinar_core::abm::{AdaptionMatrix, InitialCondition};
use sinar_core::experiments::{NetworkSpec, OpinionExperiment};
use sinar_core::henon::{HenonExperiment, HenonParams};
use sinar_core::io::read_file;
use sinar_core::network::Network;

use crate::error::{CliError, CliResult};

/// Reference adaption matrix, used when no other is given.
pub const DEFAULT_ALPHA_CSV: &str = include_str!("../data/alpha_default.csv");

pub const DEFAULT_P_VALUES: [usize; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];
pub const DEFAULT_LAMBDAS: [f64; 2] = [0.0, 0.05];

/// Largest agent count accepted from a config file.
pub const MAX_AGENTS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NetworkConfig {
    Complete { n_agents: usize },
    Clustered { n_agents: usize, clusters: usize, p_between: f64 },
    EdgeList { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialConfig {
    Percentages(Vec<f64>),
    PerCluster(Vec<Vec<f64>>),
}

impl InitialConfig {
    pub fn to_condition(&self) -> InitialCondition {
        match self {
            InitialConfig::Percentages(p) => InitialCondition::Percentages(p.clone()),
            InitialConfig::PerCluster(c) => InitialCondition::PerCluster(c.clone()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HenonConfig {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub x0: Option<f64>,
    pub y0: Option<f64>,
    pub burn_in: Option<usize>,
    pub train: Option<usize>,
    pub validate: Option<usize>,
    pub attractor_train: Option<usize>,
    pub attractor_steps: Option<usize>,
    pub lambda: Option<f64>,
    pub p_values: Option<Vec<usize>>,
}

/// Everything a run needs. Unset fields fall back to the preset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub horizon: Option<usize>,
    pub realisations: Option<usize>,
    pub train: Option<usize>,
    pub block_len: Option<usize>,
    pub p_values: Option<Vec<usize>>,
    pub lambdas: Option<Vec<f64>>,
    /// Inline M×M matrix; takes precedence over `alpha_file`.
    pub alpha: Option<Vec<Vec<f64>>>,
    pub alpha_file: Option<PathBuf>,
    pub network: Option<NetworkConfig>,
    pub initial: Option<InitialConfig>,
    pub henon: Option<HenonConfig>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> CliResult<ExperimentConfig> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    /// Reads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> CliResult<ExperimentConfig> {
        let mut cfg = Self::from_toml_str(&read_file(path)?)
            .map_err(|e| CliError::config(format!("{}: {}", path.display(), e.msg)))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.alpha_file.as_mut() {
            rebase(p);
        }
        if let Some(NetworkConfig::EdgeList { path }) = cfg.network.as_mut() {
            rebase(path);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(mut self, over: ExperimentConfig) -> ExperimentConfig {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(preset, seed, out, horizon, realisations, train, block_len, p_values, lambdas, network, initial);
        if over.alpha.is_some() || over.alpha_file.is_some() {
            self.alpha = over.alpha;
            self.alpha_file = over.alpha_file;
        }
        if let Some(h) = over.henon {
            let mut base = self.henon.unwrap_or_default();
            macro_rules! take_h {
                ($($f:ident),*) => { $( if h.$f.is_some() { base.$f = h.$f; } )* };
            }
            take_h!(a, b, c, x0, y0, burn_in, train, validate, attractor_train, attractor_steps, lambda, p_values);
            self.henon = Some(base);
        }
        self
    }

    fn alpha_matrix(&self) -> CliResult<AdaptionMatrix> {
        if let Some(rows) = &self.alpha {
            return Ok(AdaptionMatrix::new(rows)?);
        }
        let text = match &self.alpha_file {
            Some(path) => read_file(path)?,
            None => DEFAULT_ALPHA_CSV.to_string(),
        };
        Ok(AdaptionMatrix::parse_csv(&text)?)
    }

    /// Fills every field from the preset and checks ranges.
    pub fn resolve(&self) -> CliResult<Resolved> {
        let seed = self.seed.unwrap_or(1);
        let preset = OpinionExperiment::preset(self.preset.as_deref().unwrap_or("case1"), seed)?;
        let network = self.network.clone().unwrap_or(match preset.network {
            NetworkSpec::Complete { n_agents } => NetworkConfig::Complete { n_agents },
            NetworkSpec::Clustered {
                n_agents,
                n_clusters,
                p_between,
            } => NetworkConfig::Clustered {
                n_agents,
                clusters: n_clusters,
                p_between,
            },
        });
        let initial = self.initial.clone().unwrap_or(match &preset.initial {
            InitialCondition::PerCluster(c) => InitialConfig::PerCluster(c.clone()),
            InitialCondition::Percentages(p) => InitialConfig::Percentages(p.clone()),
            InitialCondition::Explicit(_) => unreachable!("presets use distributions"),
        });
        let resolved = Resolved {
            seed,
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("out")),
            network,
            alpha: self.alpha_matrix()?,
            initial,
            horizon: self.horizon.unwrap_or(preset.horizon),
            realisations: self.realisations.unwrap_or(preset.realisations),
            train: self.train.unwrap_or(preset.train),
            block_len: self.block_len.unwrap_or(preset.block_len),
            p_values: self.p_values.clone().unwrap_or_else(|| DEFAULT_P_VALUES.to_vec()),
            lambdas: self.lambdas.clone().unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec()),
            henon: self.henon.clone().unwrap_or_default(),
        };
        resolved.check()?;
        Ok(resolved)
    }
}

/// A fully specified configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub seed: u64,
    pub out: PathBuf,
    pub network: NetworkConfig,
    pub alpha: AdaptionMatrix,
    pub initial: InitialConfig,
    pub horizon: usize,
    pub realisations: usize,
    pub train: usize,
    pub block_len: usize,
    pub p_values: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub henon: HenonConfig,
}

pub fn check_p_values(p: &[usize]) -> CliResult<()> {
    if p.is_empty() {
        return Err(CliError::config("p_values is empty"));
    }
    if p[0] == 0 || p.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::config("p_values must be positive and strictly increasing"));
    }
    Ok(())
}

pub fn check_lambdas(l: &[f64]) -> CliResult<()> {
    if l.is_empty() {
        return Err(CliError::config("lambdas is empty"));
    }
    if l.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(CliError::config("lambdas must be finite and non-negative"));
    }
    Ok(())
}

impl Resolved {
    fn check(&self) -> CliResult<()> {
        match &self.network {
            NetworkConfig::Complete { n_agents } | NetworkConfig::Clustered { n_agents, .. }
                if *n_agents == 0 || *n_agents > MAX_AGENTS =>
            {
                return Err(CliError::config(format!("n_agents must lie in 1..={MAX_AGENTS}")));
            }
            NetworkConfig::Clustered { p_between, .. } if !(0.0..=1.0).contains(p_between) => {
                return Err(CliError::config("p_between must lie in [0, 1]"));
            }
            _ => {}
        }
        if self.horizon == 0 {
            return Err(CliError::config("horizon must be positive"));
        }
        if self.block_len == 0 {
            return Err(CliError::config("block_len must be positive"));
        }
        check_p_values(&self.p_values)?;
        check_lambdas(&self.lambdas)?;
        if let Some(p) = &self.henon.p_values {
            check_p_values(p)?;
        }
        Ok(())
    }

    pub fn build_network(&self) -> CliResult<Network> {
        let spec = match &self.network {
            NetworkConfig::Complete { n_agents } => NetworkSpec::Complete { n_agents: *n_agents },
            NetworkConfig::Clustered {
                n_agents,
                clusters,
                p_between,
            } => NetworkSpec::Clustered {
                n_agents: *n_agents,
                n_clusters: *clusters,
                p_between: *p_between,
            },
            NetworkConfig::EdgeList { path } => return Ok(Network::parse_edge_list(&read_file(path)?)?),
        };
        Ok(spec.build(self.seed)?)
    }

    pub fn henon_experiment(&self) -> HenonExperiment {
        let h = &self.henon;
        let r = HenonParams::reference();
        let mut e = HenonExperiment::new(HenonParams {
            a: h.a.unwrap_or(r.a),
            b: h.b.unwrap_or(r.b),
            c: h.c.unwrap_or(r.c),
            x0: h.x0.unwrap_or(r.x0),
            y0: h.y0.unwrap_or(r.y0),
        });
        e.burn_in = h.burn_in.unwrap_or(e.burn_in);
        e.train = h.train.unwrap_or(e.train);
        e.validate = h.validate.unwrap_or(e.validate);
        e.attractor_train = h.attractor_train.unwrap_or(e.attractor_train);
        e.attractor_steps = h.attractor_steps.unwrap_or(e.attractor_steps);
        e.lambda = h.lambda.unwrap_or(e.lambda);
        e
    }

    /// The fully specified config, as written to manifests. Loading it
    /// back reproduces the run.
    pub fn to_config(&self) -> ExperimentConfig {
        let e = self.henon_experiment();
        ExperimentConfig {
            preset: None,
            seed: Some(self.seed),
            out: Some(self.out.clone()),
            horizon: Some(self.horizon),
            realisations: Some(self.realisations),
            train: Some(self.train),
            block_len: Some(self.block_len),
            p_values: Some(self.p_values.clone()),
            lambdas: Some(self.lambdas.clone()),
            alpha: Some(self.alpha.rows()),
            alpha_file: None,
            network: Some(self.network.clone()),
            initial: Some(self.initial.clone()),
            henon: Some(HenonConfig {
                a: Some(e.params.a),
                b: Some(e.params.b),
                c: Some(e.params.c),
                x0: Some(e.params.x0),
                y0: Some(e.params.y0),
                burn_in: Some(e.burn_in),
                train: Some(e.train),
                validate: Some(e.validate),
                attractor_train: Some(e.attractor_train),
                attractor_steps: Some(e.attractor_steps),
                lambda: Some(e.lambda),
                p_values: self.henon.p_values.clone(),
            }),
        }
    }
}
