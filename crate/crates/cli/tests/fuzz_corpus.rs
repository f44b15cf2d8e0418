//! Runs the checked-in fuzz corpus through the same checks as the fuzz
//! targets.

use std::fs;
use std::path::PathBuf;

use sinar_cli::config::NetworkConfig;
use sinar_cli::ExperimentConfig;
use sinar_core::abm::AdaptionMatrix;
use sinar_core::io::{parse_point_cloud_csv, parse_trajectory_csv, point_cloud_to_csv, trajectory_to_csv};
use sinar_core::network::Network;
use sinar_core::sinar::{parse_model, write_model};

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(out.len() >= 3, "corpus for {target} is too small");
    out
}

/// Runs `check` on every seed and returns how many parsed.
fn run<F: Fn(&str) -> bool>(target: &str, check: F) -> usize {
    seeds(target).iter().filter(|(_, text)| check(text)).count()
}

#[test]
fn edge_list_seeds() {
    let ok = run("edge_list", |text| match Network::parse_edge_list(text) {
        Ok(net) => {
            let again = Network::parse_edge_list(&net.to_edge_list()).unwrap();
            assert_eq!(again.n_agents(), net.n_agents());
            (0..net.n_agents()).for_each(|i| assert_eq!(again.degree(i), net.degree(i)));
            true
        }
        Err(_) => false,
    });
    assert_eq!(ok, 4);
}

#[test]
fn trajectory_csv_seeds() {
    let ok = run("trajectory_csv", |text| match parse_trajectory_csv(text) {
        Ok(t) => {
            assert_eq!(parse_trajectory_csv(&trajectory_to_csv(&t)).unwrap(), t);
            true
        }
        Err(_) => false,
    });
    assert_eq!(ok, 3);
}

#[test]
fn model_file_seeds() {
    let ok = run("model_file", |text| match parse_model(text) {
        Ok(m) => {
            assert_eq!(parse_model(&write_model(&m)).unwrap(), m);
            true
        }
        Err(_) => false,
    });
    assert_eq!(ok, 3);
}

#[test]
fn config_seeds() {
    let ok = run("config", |text| match ExperimentConfig::from_toml_str(text) {
        Ok(cfg) => {
            if !matches!(cfg.network, Some(NetworkConfig::EdgeList { .. })) {
                let _ = cfg.resolve();
            }
            assert_eq!(ExperimentConfig::from_toml_str(&cfg.to_toml()).unwrap(), cfg);
            true
        }
        Err(_) => false,
    });
    assert_eq!(ok, 4);
}

#[test]
fn alpha_csv_seeds() {
    let ok = run("alpha_csv", |text| match AdaptionMatrix::parse_csv(text) {
        Ok(a) => {
            assert_eq!(AdaptionMatrix::parse_csv(&a.to_csv()).unwrap(), a);
            true
        }
        Err(_) => false,
    });
    assert_eq!(ok, 3);
}

#[test]
fn point_cloud_csv_seeds() {
    let ok = run("point_cloud_csv", |text| match parse_point_cloud_csv(text) {
        Ok(c) => {
            assert_eq!(parse_point_cloud_csv(&point_cloud_to_csv(&c)).unwrap(), c);
            true
        }
        Err(_) => false,
    });
    assert_eq!(ok, 4);
}
