//! Scenario-driven experiment runner for the delayed leader-follower
//! opinion-dynamics laboratory: simulation runs with certificate
//! checking and artifact output, Wasserstein stability sweeps, and
//! mean-field limit refinement studies.

pub mod error;
pub mod limit;
pub mod runner;
pub mod scenario;
pub mod stability;

pub use error::{Error, Result};
pub use scenario::Scenario;
