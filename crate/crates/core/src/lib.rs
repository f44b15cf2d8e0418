//! Agent-based opinion dynamics on networks, their macroscopic
//! approximations, and data-driven identification of nonlinear
//! autoregressive models with memory.

pub mod abm;
pub mod error;
pub mod experiments;
pub mod henon;
pub mod io;
pub mod macrodynamics;
pub mod network;
pub mod sinar;
pub mod trajectory;
pub mod validation;

pub use error::{Error, Result};
pub use trajectory::{relative_error, Trajectory};
