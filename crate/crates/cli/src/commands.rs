//! Subcommand implementations.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use sinar_core::abm::simulate;
use sinar_core::experiments::{linear_two_cluster_series, linear_two_cluster_study, two_cluster_study, TwoClusterVariant};
use sinar_core::henon::{delay_embed, hausdorff_distance, simulate_henon, PointCloud};
use sinar_core::io::{
    micro_to_csv, parse_point_cloud_csv, parse_trajectory_csv, point_cloud_to_csv, read_file, trajectory_to_csv,
    write_file,
};
use sinar_core::sinar::{build_hankel, fit_with, parse_model, write_model, Dictionary, FitOptions, Method, NarModel};
use sinar_core::validation::{memory_sweep, simplex_violation, split_realisations};
use sinar_core::Trajectory;

use crate::config::{check_lambdas, check_p_values, ExperimentConfig, HenonConfig, Resolved};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "sinar", version, about = "Opinion-dynamics simulation and sparse NAR identification")]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML experiment config; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an ensemble of the agent-based model.
    Simulate(SimulateArgs),
    /// Fit NAR models to trajectory files.
    Fit(FitArgs),
    /// Roll a fitted model forward from a trajectory.
    Predict(PredictArgs),
    /// Simulate, fit and score a grid of memory depths and λ values.
    Sweep(ExperimentArgs),
    /// Extended Hénon benchmark.
    Henon(HenonArgs),
    /// Deterministic two-cluster studies.
    AppendixC(AppendixArgs),
    /// Hausdorff distance between two point sets.
    Hausdorff(HausdorffArgs),
}

/// Memory depths as `1,2,5` or `1..10` (inclusive) or a mix.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthList(pub Vec<usize>);

pub fn parse_depths(s: &str) -> Result<DepthList, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        let bad = || format!("bad memory depth {part:?}");
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
            if a > b || b - a > 100_000 {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(DepthList(out))
}

#[derive(Debug, Clone, Args, Default)]
pub struct ExperimentArgs {
    /// Base experiment: case1, case2 or case3.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub realisations: Option<usize>,
    /// Realisations used for training.
    #[arg(long)]
    pub train: Option<usize>,
    #[arg(long)]
    pub block_len: Option<usize>,
    /// Memory depths, e.g. `1..10`.
    #[arg(long = "p", value_parser = parse_depths)]
    pub p_values: Option<DepthList>,
    /// Comma-separated λ values.
    #[arg(long = "lambda", value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// M×M adaption matrix CSV.
    #[arg(long)]
    pub alpha: Option<PathBuf>,
}

impl ExperimentArgs {
    fn overrides(&self) -> ExperimentConfig {
        ExperimentConfig {
            preset: self.preset.clone(),
            horizon: self.horizon,
            realisations: self.realisations,
            train: self.train,
            block_len: self.block_len,
            p_values: self.p_values.clone().map(|d| d.0),
            lambdas: self.lambdas.clone(),
            alpha_file: self.alpha.clone(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Also write every agent's opinion.
    #[arg(long)]
    pub micro: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    SequentialThreshold,
    LassoMeanSquared,
    LassoResidualNorm,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::SequentialThreshold => Method::SequentialThreshold,
            MethodArg::LassoMeanSquared => Method::LassoMeanSquared,
            MethodArg::LassoResidualNorm => Method::LassoResidualNorm,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Trajectory CSV files, one realisation each.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    #[arg(long = "p", value_parser = parse_depths, default_value = "1")]
    pub p_values: DepthList,
    #[arg(long = "lambda", value_delimiter = ',', default_value = "0")]
    pub lambdas: Vec<f64>,
    /// `opinion`, `henon`, `linear` or `poly:<degree>`.
    #[arg(long, default_value = "opinion")]
    pub dictionary: String,
    #[arg(long, value_enum, default_value = "sequential-threshold")]
    pub method: MethodArg,
    /// Use only the leading coordinates; defaults to what the dictionary
    /// needs, or all of them.
    #[arg(long)]
    pub coordinates: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    /// Model file written by `fit`.
    #[arg(long)]
    pub model: PathBuf,
    /// Trajectory CSV whose states seed the rollout.
    pub history: PathBuf,
    #[arg(long)]
    pub steps: usize,
    /// Seed from the first `from` states only.
    #[arg(long)]
    pub from: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HenonMode {
    /// Error and Hausdorff curves over p.
    Curves,
    /// Only the simulated orbit.
    Orbit,
}

#[derive(Debug, Clone, Args)]
pub struct HenonArgs {
    #[arg(long, value_enum, default_value = "curves")]
    pub mode: HenonMode,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub train: Option<usize>,
    #[arg(long)]
    pub validate: Option<usize>,
    #[arg(long)]
    pub attractor_train: Option<usize>,
    #[arg(long)]
    pub attractor_steps: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "p", value_parser = parse_depths)]
    pub p_values: Option<DepthList>,
    /// Write the reconstructed attractor of every p.
    #[arg(long)]
    pub attractors: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Symmetric,
    Nonsymmetric,
    Linear,
}

#[derive(Debug, Clone, Args)]
pub struct AppendixArgs {
    #[arg(long, value_enum, default_value = "symmetric")]
    pub variant: Variant,
    #[arg(long, default_value_t = 900)]
    pub horizon: usize,
    /// Steps used for training; the rest is held out.
    #[arg(long, default_value_t = 500)]
    pub train_steps: usize,
    #[arg(long = "p", value_parser = parse_depths, default_value = "1..5")]
    pub p_values: DepthList,
    /// Growth factors and initial values of the two linear clusters.
    #[arg(long, default_value_t = 0.9, allow_hyphen_values = true)]
    pub l1: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub l2: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub x1: f64,
    #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
    pub x2: f64,
    /// M×M adaption matrix CSV.
    #[arg(long)]
    pub alpha: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct HausdorffArgs {
    /// Point-cloud or trajectory CSV.
    pub a: PathBuf,
    pub b: PathBuf,
}

fn fnum(v: f64) -> String {
    format!("{v:.16e}")
}

/// Collects written files and the manifest for one command.
struct Run {
    out: PathBuf,
    command: String,
    files: Vec<PathBuf>,
}

impl Run {
    fn new(out: &Path, command: &str) -> Run {
        Run {
            out: out.to_path_buf(),
            command: command.to_string(),
            files: Vec::new(),
        }
    }

    fn write(&mut self, name: impl AsRef<Path>, contents: &str) -> CliResult<()> {
        let path = self.out.join(name.as_ref());
        write_file(&path, contents)?;
        self.files.push(name.as_ref().to_path_buf());
        Ok(())
    }

    fn finish(self, config: &ExperimentConfig) -> CliResult<PathBuf> {
        let mut s = format!("# sinar {}\n", self.command);
        for f in &self.files {
            let _ = writeln!(s, "# wrote {}", f.display());
        }
        s.push_str(&config.to_toml());
        let path = self.out.join("manifest.toml");
        write_file(&path, &s)?;
        Ok(path)
    }
}

fn resolve(cli: &Cli, over: ExperimentConfig) -> CliResult<Resolved> {
    let base = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let flags = ExperimentConfig {
        seed: cli.seed,
        out: cli.out.clone(),
        ..over
    };
    base.merge(flags).resolve()
}

fn quoted(args: &[String]) -> String {
    args.iter()
        .map(|a| if a.contains(char::is_whitespace) { format!("{a:?}") } else { a.clone() })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses `args` (without the program name) and runs the command, writing
/// human-readable output to `stdout`.
pub fn run(args: &[String], stdout: &mut dyn Write) -> CliResult<()> {
    let argv = std::iter::once("sinar".to_string()).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = write!(stdout, "{e}");
            return Ok(());
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return Err(CliError::usage(first));
        }
    };
    let command = quoted(args);
    let w = |stdout: &mut dyn Write, s: String| {
        stdout
            .write_all(s.as_bytes())
            .map_err(|e| CliError::new("io", format!("stdout: {e}")))
    };
    match &cli.command {
        Command::Simulate(a) => w(stdout, cmd_simulate(&cli, a, &command)?),
        Command::Fit(a) => w(stdout, cmd_fit(&cli, a, &command)?),
        Command::Predict(a) => w(stdout, cmd_predict(&cli, a, &command)?),
        Command::Sweep(a) => w(stdout, cmd_sweep(&cli, a, &command)?),
        Command::Henon(a) => w(stdout, cmd_henon(&cli, a, &command)?),
        Command::AppendixC(a) => w(stdout, cmd_appendix_c(&cli, a, &command)?),
        Command::Hausdorff(a) => w(stdout, cmd_hausdorff(&cli, a)?),
    }
}

pub fn cmd_simulate(cli: &Cli, args: &SimulateArgs, command: &str) -> CliResult<String> {
    let cfg = resolve(cli, args.experiment.overrides())?;
    let net = cfg.build_network()?;
    info!("simulating {} realisations of {} steps on {} agents", cfg.realisations, cfg.horizon, net.n_agents());
    let ens = simulate(
        &net,
        &cfg.alpha,
        &cfg.initial.to_condition(),
        cfg.horizon,
        cfg.realisations,
        cfg.seed,
        args.micro,
    )?;
    let mut run = Run::new(&cfg.out, command);
    for (r, traj) in ens.macro_trajectories.iter().enumerate() {
        run.write(format!("trajectories/realisation_{r:03}.csv"), &trajectory_to_csv(traj))?;
    }
    if let Some(micro) = &ens.micro_trajectories {
        for (r, states) in micro.iter().enumerate() {
            run.write(format!("micro/realisation_{r:03}.csv"), &micro_to_csv(states))?;
        }
    }
    let n = run.files.len();
    let manifest = run.finish(&cfg.to_config())?;
    Ok(format!("wrote {n} files and {}\n", manifest.display()))
}

fn dictionary(name: &str, m: usize, p: usize) -> CliResult<Dictionary> {
    let d = match name {
        "opinion" => Dictionary::opinion(p)?,
        "henon" => Dictionary::henon(p)?,
        "linear" => Dictionary::linear(m, p)?,
        other => match other.strip_prefix("poly:").map(str::parse::<u32>) {
            Some(Ok(deg)) => Dictionary::polynomial(m, p, deg, true)?,
            _ => {
                return Err(CliError::usage(format!(
                    "unknown dictionary `{other}` (opinion, henon, linear, poly:<degree>)"
                )))
            }
        },
    };
    Ok(d)
}

fn dictionary_dim(name: &str) -> Option<usize> {
    match name {
        "opinion" => Some(2),
        "henon" => Some(1),
        _ => None,
    }
}

fn load_trajectories(files: &[PathBuf], keep: Option<usize>) -> CliResult<Vec<Trajectory>> {
    files
        .iter()
        .map(|f| {
            let t = parse_trajectory_csv(&read_file(f)?)
                .map_err(|e| CliError::new(e.kind(), format!("{}: {e}", f.display())))?;
            match keep {
                Some(k) if k != t.dim() => Ok(t.leading_coordinates(k)?),
                _ => Ok(t),
            }
        })
        .collect()
}

fn model_name(p: usize, lambda: f64) -> String {
    format!("model_p{p}_lambda{lambda}.txt")
}

pub fn cmd_fit(cli: &Cli, args: &FitArgs, command: &str) -> CliResult<String> {
    check_p_values(&args.p_values.0)?;
    check_lambdas(&args.lambdas)?;
    let keep = args.coordinates.or(dictionary_dim(&args.dictionary));
    let trajs = load_trajectories(&args.files, keep)?;
    let m = trajs[0].dim();
    let opts = FitOptions {
        method: args.method.into(),
        ..Default::default()
    };
    let mut cfg = ExperimentConfig::default().merge(ExperimentConfig {
        seed: cli.seed,
        out: cli.out.clone(),
        ..Default::default()
    });
    cfg.p_values = Some(args.p_values.0.clone());
    cfg.lambdas = Some(args.lambdas.clone());
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut run = Run::new(&out, command);
    let mut report = String::new();
    for &p in &args.p_values.0 {
        let dict = dictionary(&args.dictionary, m, p)?;
        let data = build_hankel(&trajs, p)?;
        for &lambda in &args.lambdas {
            let model = fit_with(&data, &dict, lambda, &opts)?;
            let _ = writeln!(report, "# p={p} lambda={lambda} method={} terms={}", model.method.as_str(), model.nonzero_count());
            for eq in model.equations() {
                let _ = writeln!(report, "{eq}");
            }
            run.write(model_name(p, lambda), &write_model(&model))?;
        }
    }
    run.finish(&cfg)?;
    Ok(report)
}

fn is_opinion_model(model: &NarModel) -> bool {
    Dictionary::opinion(model.p()).is_ok_and(|d| d == model.dictionary)
}

pub fn cmd_predict(cli: &Cli, args: &PredictArgs, command: &str) -> CliResult<String> {
    let model = parse_model(&read_file(&args.model)?)
        .map_err(|e| CliError::new(e.kind(), format!("{}: {e}", args.model.display())))?;
    let mut history = load_trajectories(std::slice::from_ref(&args.history), Some(model.m()))?.remove(0);
    if let Some(t) = args.from {
        if t == 0 || t > history.len() {
            return Err(CliError::usage(format!("--from {t} outside 1..={}", history.len())));
        }
        history = history.slice(0..t);
    }
    let pred = model.rollout(&history, args.steps)?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut run = Run::new(&out, command);
    run.write("prediction.csv", &trajectory_to_csv(&pred))?;
    let mut report = format!("predicted {} steps from {} states\n", pred.len(), history.len());
    if is_opinion_model(&model) {
        let v = simplex_violation(&pred);
        if v > 0.0 {
            warn!("prediction leaves the simplex by {v:e}");
        }
        let _ = writeln!(report, "max_simplex_violation={}", fnum(v));
    }
    run.finish(&ExperimentConfig {
        seed: cli.seed,
        out: Some(out.clone()),
        ..Default::default()
    })?;
    Ok(report)
}

pub fn cmd_sweep(cli: &Cli, args: &ExperimentArgs, command: &str) -> CliResult<String> {
    let cfg = resolve(cli, args.overrides())?;
    if cfg.alpha.n_opinions() != 3 {
        return Err(CliError::new("unsupported", "the opinion dictionary needs three opinions"));
    }
    let net = cfg.build_network()?;
    let ens = simulate(
        &net,
        &cfg.alpha,
        &cfg.initial.to_condition(),
        cfg.horizon,
        cfg.realisations,
        cfg.seed,
        false,
    )?;
    let observed = ens
        .macro_trajectories
        .iter()
        .map(|t| t.leading_coordinates(2))
        .collect::<Result<Vec<_>, _>>()?;
    let (train, validate) = split_realisations(&observed, cfg.train)?;
    let sweep = memory_sweep(train, validate, Dictionary::opinion, &cfg.p_values, &cfg.lambdas, cfg.block_len)?;
    let mut run = Run::new(&cfg.out, command);
    run.write("sweep.csv", &sweep.to_csv())?;
    let mut report = String::from("p lambda mean_block_error n_diverged n_undefined\n");
    for cell in &sweep.cells {
        run.write(format!("models/{}", model_name(cell.p, cell.lambda)), &write_model(&cell.model))?;
        let _ = writeln!(
            report,
            "{} {} {:.6e} {} {}",
            cell.p, cell.lambda, cell.mean_block_error, cell.n_diverged, cell.n_undefined
        );
    }
    run.finish(&cfg.to_config())?;
    Ok(report)
}

pub fn cmd_henon(cli: &Cli, args: &HenonArgs, command: &str) -> CliResult<String> {
    let over = ExperimentConfig {
        henon: Some(HenonConfig {
            a: args.a,
            b: args.b,
            c: args.c,
            x0: None,
            y0: None,
            burn_in: args.burn_in,
            train: args.train,
            validate: args.validate,
            attractor_train: args.attractor_train,
            attractor_steps: args.attractor_steps,
            lambda: args.lambda,
            p_values: args.p_values.clone().map(|d| d.0),
        }),
        ..Default::default()
    };
    let cfg = resolve(cli, over)?;
    let exp = cfg.henon_experiment();
    let mut run = Run::new(&cfg.out, command);
    let mut report = String::new();
    match args.mode {
        HenonMode::Orbit => {
            let orbit = simulate_henon(&exp.params, exp.burn_in + exp.train + exp.validate)?;
            run.write("henon_orbit.csv", &trajectory_to_csv(&orbit.joint()))?;
            let _ = writeln!(report, "orbit of {} states", orbit.len());
        }
        HenonMode::Curves => {
            let p_values = cfg.henon.p_values.clone().unwrap_or_else(|| (1..=30).collect());
            let cells = exp.run(&p_values)?;
            let mut csv = String::from("p,coefficient_error,validation_error,hausdorff\n");
            report.push_str("p coefficient_error validation_error hausdorff\n");
            for c in &cells {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    c.p,
                    fnum(c.coefficient_error),
                    fnum(c.validation_error),
                    fnum(c.hausdorff)
                );
                let _ = writeln!(
                    report,
                    "{} {:.3e} {:.3e} {:.3e}",
                    c.p, c.coefficient_error, c.validation_error, c.hausdorff
                );
                if args.attractors {
                    if let Some(rec) = &c.reconstruction {
                        run.write(format!("attractor_p{}.csv", c.p), &point_cloud_to_csv(rec))?;
                    }
                }
            }
            run.write("henon_errors.csv", &csv)?;
            if exp.attractor_steps >= 2 {
                run.write("attractor_true.csv", &point_cloud_to_csv(&exp.true_attractor()?))?;
            }
        }
    }
    run.finish(&cfg.to_config())?;
    Ok(report)
}

pub fn cmd_appendix_c(cli: &Cli, args: &AppendixArgs, command: &str) -> CliResult<String> {
    let cfg = resolve(
        cli,
        ExperimentConfig {
            alpha_file: args.alpha.clone(),
            ..Default::default()
        },
    )?;
    let mut run = Run::new(&cfg.out, command);
    let mut report = String::new();
    match args.variant {
        Variant::Linear => {
            let s = linear_two_cluster_study(args.l1, args.l2, args.x1, args.x2, args.horizon)?;
            let series = linear_two_cluster_series(args.l1, args.l2, args.x1, args.x2, args.horizon);
            run.write("series.csv", &trajectory_to_csv(&series))?;
            let mut csv = String::from("quantity,value\n");
            for (k, v) in [
                ("fitted_c1", s.fitted[0]),
                ("fitted_c2", s.fitted[1]),
                ("analytic_c1", s.analytic[0]),
                ("analytic_c2", s.analytic[1]),
                ("max_recurrence_residual", s.max_recurrence_residual),
            ] {
                let _ = writeln!(csv, "{k},{}", fnum(v));
                let _ = writeln!(report, "{k} = {v:.6e}");
            }
            run.write("linear.csv", &csv)?;
        }
        Variant::Symmetric | Variant::Nonsymmetric => {
            let variant = if args.variant == Variant::Symmetric {
                TwoClusterVariant::Symmetric
            } else {
                TwoClusterVariant::NonSymmetric
            };
            check_p_values(&args.p_values.0)?;
            let study = two_cluster_study(variant, &cfg.alpha, args.horizon, args.train_steps, &args.p_values.0)?;
            run.write("truth.csv", &trajectory_to_csv(&study.truth))?;
            let mut csv = String::from("p,one_step_error,rollout_error,n_terms\n");
            report.push_str("p one_step_error rollout_error\n");
            for f in &study.fits {
                let rollout = f.rollout_error.unwrap_or(f64::INFINITY);
                let _ = writeln!(csv, "{},{},{},{}", f.p, fnum(f.one_step_error), fnum(rollout), f.model.nonzero_count());
                let _ = writeln!(report, "{} {:.3e} {:.3e}", f.p, f.one_step_error, rollout);
                run.write(model_name(f.p, 0.0), &write_model(&f.model))?;
                if let Some(r) = &f.rollout {
                    run.write(format!("rollout_p{}.csv", f.p), &trajectory_to_csv(r))?;
                }
                for eq in f.model.equations() {
                    info!("p={}: {eq}", f.p);
                }
            }
            run.write("fits.csv", &csv)?;
        }
    }
    run.finish(&cfg.to_config())?;
    Ok(report)
}

/// Reads a point-cloud CSV, or a trajectory CSV whose states become points.
pub fn load_points(path: &Path) -> CliResult<PointCloud> {
    let text = read_file(path)?;
    let wrap = |e: sinar_core::Error| CliError::new(e.kind(), format!("{}: {e}", path.display()));
    if text.trim_start().starts_with("t,") {
        let t = parse_trajectory_csv(&text).map_err(wrap)?;
        if t.dim() == 1 {
            return delay_embed(t.as_flat(), 1).map_err(|e| wrap(e).into());
        }
        PointCloud::new(t.dim(), t.as_flat().to_vec()).map_err(|e| wrap(e).into())
    } else {
        parse_point_cloud_csv(&text).map_err(|e| wrap(e).into())
    }
}

pub fn cmd_hausdorff(cli: &Cli, args: &HausdorffArgs) -> CliResult<String> {
    let a = load_points(&args.a)?;
    let b = load_points(&args.b)?;
    let d = hausdorff_distance(&a, &b)?;
    if let Some(out) = &cli.out {
        write_file(out.join("hausdorff.csv"), &format!("hausdorff\n{}\n", fnum(d)))?;
    }
    Ok(format!("hausdorff={}\n", fnum(d)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_lists() {
        assert_eq!(parse_depths("1..3").unwrap().0, vec![1, 2, 3]);
        assert_eq!(parse_depths("1,4..=5, 9").unwrap().0, vec![1, 4, 5, 9]);
        assert!(parse_depths("3..1").is_err());
        assert!(parse_depths("x").is_err());
        assert!(parse_depths("").is_err());
    }

    #[test]
    fn dictionary_names() {
        assert_eq!(dictionary("opinion", 2, 2).unwrap().len(), 10);
        assert_eq!(dictionary("henon", 1, 3).unwrap().len(), 5);
        assert_eq!(dictionary("linear", 3, 2).unwrap().len(), 6);
        assert!(dictionary("poly:2", 2, 1).unwrap().has_constant());
        assert_eq!(dictionary("poly:x", 2, 1).unwrap_err().kind, "usage");
    }
}
