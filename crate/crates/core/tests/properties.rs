use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sinar_core::abm::{observe, simulate, step, AdaptionMatrix, InitialCondition, MicroState};
use sinar_core::henon::{
    delay_embed, exact_memory_model, hausdorff_brute_force, hausdorff_distance, hausdorff_grid, simulate_henon,
    HenonParams, PointCloud,
};
use sinar_core::io::{parse_trajectory_csv, trajectory_to_csv};
use sinar_core::macrodynamics::{expected_step_complete, reduce_m3};
use sinar_core::network::Network;
use sinar_core::sinar::{
    build_hankel, feature_matrix, fit, parse_model, write_model, Dictionary, LassoOptions,
    LassoProblem, Method, NarModel, Penalty,
};
use sinar_core::Trajectory;

fn alpha_strategy() -> impl Strategy<Value = AdaptionMatrix> {
    prop::collection::vec(0.0f64..=1.0, 9).prop_map(|v| {
        let rows: Vec<Vec<f64>> = v.chunks(3).map(<[f64]>::to_vec).collect();
        AdaptionMatrix::new(&rows).unwrap()
    })
}

fn simplex_point(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let e: [f64; 3] = [0, 1, 2].map(|_| -rng.random::<f64>().max(1e-300).ln());
    let s: f64 = e.iter().sum();
    e.map(|v| v / s)
}

/// Noisy two-coordinate opinion-like series driven by the reduced map and
/// kept on the simplex.
fn opinion_series(alpha: &AdaptionMatrix, len: usize, seed: u64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = reduce_m3(alpha).unwrap();
    let x0 = simplex_point(&mut rng);
    let mut x = [x0[0], x0[1]];
    let mut out = Trajectory::new(2);
    for _ in 0..len {
        out.push(&x).unwrap();
        let n = coeffs.evaluate(x[0], x[1]);
        x = [
            (n[0] + 0.01 * rng.random_range(-1.0..1.0)).max(0.0),
            (n[1] + 0.01 * rng.random_range(-1.0..1.0)).max(0.0),
        ];
        let s = x[0] + x[1];
        if s > 1.0 {
            x = [x[0] / s, x[1] / s];
        }
    }
    out
}

/// Opinion dictionary terms for p = 1, computed without the library.
fn sindy_features(states: &[&[f64]]) -> DMatrix<f64> {
    DMatrix::from_fn(5, states.len(), |r, c| {
        let (x1, x2) = (states[c][0], states[c][1]);
        [x1, x2, x1 * x1, x2 * x2, x1 * x2][r]
    })
}

/// Normal-equations least squares: W = Y Θᵀ (Θ Θᵀ)⁻¹.
fn normal_equations(theta: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let gram = theta * theta.transpose();
    let rhs = theta * y.transpose();
    gram.cholesky().expect("positive definite").solve(&rhs).transpose()
}

const LAMBDA_GRID: [f64; 9] = [0.0, 0.01, 0.03, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6];

fn scale(m: &DMatrix<f64>) -> f64 {
    m.amax().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sindy_equivalence_at_depth_one(alpha in alpha_strategy(), seed in any::<u64>()) {
        let traj = opinion_series(&alpha, 120, seed);
        let states: Vec<&[f64]> = traj.states().collect();
        let theta = sindy_features(&states[..states.len() - 1]);
        let next = DMatrix::from_fn(2, states.len() - 1, |r, c| states[c + 1][r]);

        let data = build_hankel(std::slice::from_ref(&traj), 1).unwrap();
        let dict = Dictionary::opinion(1).unwrap();
        prop_assert_eq!(&feature_matrix(&dict, &data.stacked).unwrap(), &theta);
        prop_assert_eq!(&data.next, &next);

        let model = fit(&data, &dict, 0.0).unwrap();
        let direct = normal_equations(&theta, &next);
        prop_assert!((&model.xi - &direct).amax() <= 1e-8 * scale(&direct),
            "{} vs {}", model.xi, direct);
    }

    #[test]
    fn linear_dictionary_is_least_squares_ar(
        m in 1usize..3,
        p in 1usize..5,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = 200;
        let mut x: Vec<Vec<f64>> = (0..p).map(|_| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let coef: Vec<f64> = (0..m * m * p).map(|_| rng.random_range(-0.3..0.3) / p as f64).collect();
        while x.len() < len {
            let t = x.len();
            let mut next = vec![0.0; m];
            for (i, slot) in next.iter_mut().enumerate() {
                for k in 0..p {
                    for j in 0..m {
                        *slot += coef[(i * p + k) * m + j] * x[t - 1 - k][j];
                    }
                }
                *slot += rng.random_range(-0.1..0.1);
            }
            x.push(next);
        }
        let traj = Trajectory::from_states(&x).unwrap();
        let data = build_hankel(std::slice::from_ref(&traj), p).unwrap();
        let model = fit(&data, &Dictionary::linear(m, p).unwrap(), 0.0).unwrap();

        // stacked newest-first delay vectors, built by hand
        let n = len - p;
        let theta = DMatrix::from_fn(m * p, n, |r, c| x[c + p - 1 - r / m][r % m]);
        let y = DMatrix::from_fn(m, n, |r, c| x[c + p][r]);
        let direct = normal_equations(&theta, &y);
        prop_assert!((&model.xi - &direct).amax() <= 1e-10 * scale(&direct));
    }

    #[test]
    fn lasso_objective_never_increases(seed in any::<u64>(), lambda in 0.0f64..0.2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(6, 60, |_, _| rng.random_range(-1.0..1.0));
        let y: Vec<f64> = (0..60).map(|c| a[(1, c)] - 0.4 * a[(3, c)] + 0.05 * rng.random_range(-1.0..1.0)).collect();
        let opts = LassoOptions { trace_objective: true, ..LassoOptions::default() };
        let fit = LassoProblem::new(&a).unwrap().solve(&y, lambda, &opts).unwrap();
        for w in fit.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn thresholded_fit_is_a_fixed_point(alpha in alpha_strategy(), seed in any::<u64>(), p in 1usize..3, li in 1usize..9) {
        let lambda = LAMBDA_GRID[li];
        let trajs: Vec<Trajectory> = (0..3).map(|k| opinion_series(&alpha, 80, seed.wrapping_add(k))).collect();
        let data = build_hankel(&trajs, p).unwrap();
        let dict = Dictionary::opinion(p).unwrap();
        let model = fit(&data, &dict, lambda).unwrap();
        let theta = feature_matrix(&dict, &data.stacked).unwrap();
        for i in 0..2 {
            let support: Vec<usize> = (0..dict.len()).filter(|&j| model.xi[(i, j)] != 0.0).collect();
            prop_assert!(support.iter().all(|&j| model.xi[(i, j)].abs() >= lambda));
            if support.is_empty() {
                continue;
            }
            let sub = theta.select_rows(support.iter());
            let y = data.next.rows(i, 1).into_owned();
            let refit = sub.transpose().svd(true, true).solve(&y.transpose(), 1e-14).unwrap().transpose();
            let kept = DMatrix::from_fn(1, support.len(), |_, k| model.xi[(i, support[k])]);
            let gap = (&kept * &sub - &refit * &sub).amax();
            prop_assert!(gap <= 1e-10 * scale(&y), "prediction gap {}", gap);
        }
    }

    #[test]
    fn lasso_satisfies_optimality_conditions(alpha in alpha_strategy(), seed in any::<u64>(), li in 1usize..9) {
        let lambda = LAMBDA_GRID[li] * 0.01;
        let traj = opinion_series(&alpha, 150, seed);
        let data = build_hankel(std::slice::from_ref(&traj), 1).unwrap();
        let theta = feature_matrix(&Dictionary::opinion(1).unwrap(), &data.stacked).unwrap();
        let y: Vec<f64> = data.next.row(0).iter().copied().collect();
        let w = LassoProblem::new(&theta).unwrap().solve(&y, lambda, &LassoOptions::default()).unwrap().coefficients;
        // ∂/∂w_j of ‖y − wᵀΘ‖² is −2 Θ_j r, balanced by λn·sign(w_j)
        let r = DMatrix::from_row_slice(1, y.len(), &y) - DMatrix::from_row_slice(1, 5, &w) * &theta;
        let grad = &theta * r.transpose() * 2.0;
        let t = lambda * y.len() as f64;
        let slack = 1e-6 * (t + grad.amax()).max(1e-9);
        for j in 0..5 {
            if w[j] == 0.0 {
                prop_assert!(grad[j].abs() <= t + slack, "j={} |g|={} t={}", j, grad[j].abs(), t);
            } else {
                prop_assert!((grad[j] - t * w[j].signum()).abs() <= slack, "j={} g={} t={}", j, grad[j], t);
            }
        }
    }

    #[test]
    fn lasso_support_shrinks_on_orthogonal_designs(seed in any::<u64>(), v in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 64;
        let random = DMatrix::from_fn(n, v, |_, _| rng.random_range(-1.0..1.0));
        let q = random.qr().q().transpose() * 3.0;
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let problem = LassoProblem::new(&q).unwrap();
        for penalty in [Penalty::MeanSquared, Penalty::ResidualNorm] {
            let counts: Vec<usize> = LAMBDA_GRID
                .iter()
                .map(|&l| {
                    let w = problem.solve_with_penalty(&y, l, penalty, &LassoOptions::default()).unwrap();
                    w.coefficients.iter().filter(|c| c.abs() >= 1e-8).count()
                })
                .collect();
            prop_assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{:?}: {:?}", penalty, counts);
        }
    }

    #[test]
    fn fit_ignores_trajectory_order(alpha in alpha_strategy(), seed in any::<u64>(), p in 1usize..4) {
        let trajs: Vec<Trajectory> = (0..4).map(|k| opinion_series(&alpha, 60, seed.wrapping_add(k))).collect();
        let mut shuffled = trajs.clone();
        shuffled.rotate_left(1);
        shuffled.swap(0, 2);
        let dict = Dictionary::opinion(p).unwrap();
        let a = fit(&build_hankel(&trajs, p).unwrap(), &dict, 0.0).unwrap();
        let b = fit(&build_hankel(&shuffled, p).unwrap(), &dict, 0.0).unwrap();
        let theta = feature_matrix(&dict, &build_hankel(&trajs, p).unwrap().stacked).unwrap();
        let gap = ((&a.xi - &b.xi) * &theta).amax();
        prop_assert!(gap <= 1e-12, "prediction gap {}", gap);
    }

    #[test]
    fn reduction_matches_full_expectation(alpha in alpha_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = reduce_m3(&alpha).unwrap();
        for _ in 0..20 {
            let x = simplex_point(&mut rng);
            let full = expected_step_complete(&x, &alpha).unwrap();
            let red = coeffs.evaluate(x[0], x[1]);
            prop_assert!((full[0] - red[0]).abs() <= 1e-14);
            prop_assert!((full[1] - red[1]).abs() <= 1e-14);
            prop_assert!((full.iter().sum::<f64>() - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn hausdorff_is_a_metric(seed in any::<u64>(), na in 1usize..40, nb in 1usize..40, nc in 1usize..40, dim in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cloud = |n: usize| {
            PointCloud::new(dim, (0..n * dim).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
        };
        let (a, b, c) = (cloud(na), cloud(nb), cloud(nc));
        let ab = hausdorff_brute_force(&a, &b).unwrap();
        prop_assert_eq!(ab, hausdorff_brute_force(&b, &a).unwrap());
        prop_assert_eq!(hausdorff_brute_force(&a, &a).unwrap(), 0.0);
        prop_assert!(ab > 0.0);
        let ac = hausdorff_brute_force(&a, &c).unwrap();
        let cb = hausdorff_brute_force(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-12);
        prop_assert!((hausdorff_grid(&a, &b).unwrap() - ab).abs() <= 1e-12);
        prop_assert!((hausdorff_distance(&a, &b).unwrap() - ab).abs() <= 1e-12);
    }

    #[test]
    fn truncated_expansion_tracks_the_map(
        a in 1.0f64..1.4,
        b in -0.3f64..0.3,
        c in -0.5f64..0.5,
        p in 1usize..12,
    ) {
        let params = HenonParams { a, b, c, x0: 0.0, y0: 0.0 };
        let orbit = simulate_henon(&params, 400);
        prop_assume!(orbit.is_ok());
        let orbit = orbit.unwrap();
        let model = exact_memory_model(&params, p).unwrap();
        let y_max = orbit.y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bound = c.abs().powi(p as i32 - 1) * y_max;
        for t in p - 1..orbit.len() - 1 {
            let hist: Vec<[f64; 1]> = (0..p).map(|k| [orbit.x[t - k]]).collect();
            let pred = model.predict_one_step(&hist).unwrap()[0];
            let err = (pred - orbit.x[t + 1]).abs();
            prop_assert!(err <= bound + 1e-12 * (1.0 + y_max), "t={} err={} bound={}", t, err, bound);
        }
    }

    #[test]
    fn delay_embedding_counts(len in 1usize..50, p in 1usize..6) {
        let series: Vec<f64> = (0..len).map(|t| t as f64).collect();
        match delay_embed(&series, p) {
            Ok(cloud) => {
                prop_assert!(len >= p);
                prop_assert_eq!(cloud.len(), len - p + 1);
                prop_assert_eq!(cloud.dim(), p);
                prop_assert_eq!(cloud.point(0)[0], (p - 1) as f64);
            }
            Err(_) => prop_assert!(len < p),
        }
    }

    #[test]
    fn model_file_round_trips(seed in any::<u64>(), p in 1usize..4, lambda in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dict = Dictionary::opinion(p).unwrap();
        let xi = DMatrix::from_fn(2, dict.len(), |_, _| {
            if rng.random_bool(0.3) { 0.0 } else { rng.random_range(-1e3..1e3) * 10f64.powi(rng.random_range(-20..3)) }
        });
        let mut model = NarModel::from_coefficients(dict, xi, lambda).unwrap();
        model.method = Method::ALL[rng.random_range(0..Method::ALL.len())];
        let back = parse_model(&write_model(&model)).unwrap();
        prop_assert_eq!(&back.xi, &model.xi);
        prop_assert_eq!(back.lambda.to_bits(), model.lambda.to_bits());
        prop_assert_eq!(back.method, model.method);
        prop_assert_eq!(&back.dictionary, &model.dictionary);
    }

    #[test]
    fn trajectory_csv_round_trips(values in prop::collection::vec(-1e300f64..1e300, 1..60), dim in 1usize..4) {
        let n = values.len() / dim * dim;
        prop_assume!(n > 0);
        let traj = Trajectory::from_flat(dim, values[..n].to_vec()).unwrap();
        prop_assert_eq!(parse_trajectory_csv(&trajectory_to_csv(&traj)).unwrap(), traj);
    }
}

mod abm_properties {
    use super::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn observations_stay_on_the_simplex(alpha in alpha_strategy(), seed in any::<u64>(), half in 1usize..30) {
            let net = Network::clustered(2 * half, 2, 0.3, seed).unwrap();
            let init = InitialCondition::PerCluster(vec![vec![0.5, 0.3, 0.2]; 2]);
            let ens = simulate(&net, &alpha, &init, 20, 2, seed, false).unwrap();
            for traj in &ens.macro_trajectories {
                for s in traj.states() {
                    prop_assert!(s.iter().all(|&v| (0.0..=1.0).contains(&v)));
                    prop_assert!((s.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                }
            }
            let again = simulate(&net, &alpha, &init, 20, 2, seed, false).unwrap();
            prop_assert_eq!(ens.macro_trajectories, again.macro_trajectories);
        }

        #[test]
        fn consensus_is_absorbing(alpha in alpha_strategy(), seed in any::<u64>(), opinion in 0u16..3) {
            let net = Network::complete(30).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = MicroState::consensus(30, opinion, 3).unwrap();
            for _ in 0..10 {
                s = step(&s, &net, &alpha, &mut rng).unwrap();
                prop_assert!(s.is_consensus());
                prop_assert_eq!(observe(&s)[opinion as usize], 1.0);
            }
        }
    }
}
