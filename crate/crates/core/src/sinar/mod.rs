//! Sparse identification of nonlinear autoregressive models.

pub mod dictionary;
pub mod hankel;
pub mod lasso;
pub mod model;
pub mod model_io;

pub use dictionary::{Dictionary, Term};
pub use hankel::{build_hankel, HankelData};
pub use lasso::{lasso_solve, lasso_solve_with, least_squares, LassoFit, LassoOptions, LassoProblem, Penalty};
pub use model::{
    estimate_noise_covariance, feature_matrix, fit, fit_with, CoefficientBlocks, FitDiagnostics, FitOptions,
    Method, NarModel, Solver, ZERO_THRESHOLD,
};
pub use model_io::{parse_model, write_model};
