//! Diagonal Lévy noise: covariance sequences, per-mode increment laws,
//! regularity conditions and jump paths for coupled Monte Carlo.

mod covariance;
mod law;
mod path;
mod rng;

pub use covariance::{
    decay_for_beta, hs_condition, weqii_for_law, weqii_functional, Convergence, CovarianceSpec, HsCondition,
};
pub use law::{sample_increments, JumpLaw, LevyLaw};
pub use path::{increments_from_path, sample_jump_path, Jump, JumpPath, TimeGrid};
pub use rng::{RngStreams, StreamRng};
