//! Time-delayed leader-follower Hegselmann-Krause opinion dynamics.
//!
//! The crate simulates the delayed particle system, evolves its two
//! mean-field limits by transporting empirical measures along
//! characteristics, computes every constant in the exponential consensus
//! estimate, and checks the decay bound as a runtime certificate.
//! Exact Wasserstein distances between empirical measures back the
//! stability and mean-field-limit studies.
//!
//! All numerics are generic over the scalar type through [`Scalar`];
//! the `*64` aliases at the crate root pin the default `f64` instantiation.

use std::fmt;

use num_traits::{Float, FromPrimitive, NumAssign};

mod error;
pub mod point;
pub mod kernel;
pub mod history;
pub mod config;
pub mod dde;
mod dynamics;
pub mod particle;
pub mod meanfield;
pub mod wasserstein;

pub use error::{Error, Result};

/// Floating-point scalar the whole crate is generic over.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + fmt::Debug + fmt::Display + Default + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + NumAssign + fmt::Debug + fmt::Display + Default + Send + Sync + 'static
{
}

/// Converts an `f64` literal into the working scalar type.
pub(crate) fn cast<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("constant representable in scalar type")
}

pub type Point64 = point::Point<f64>;
pub type Kernel64 = kernel::Kernel<f64>;
pub type HistoryFunction64 = history::HistoryFunction<f64>;
pub type DelayConfig64 = config::DelayConfig<f64>;
pub type ModelConfig64 = config::ModelConfig<f64>;
pub type DenseSolution64 = dde::DenseSolution<f64>;
pub type ParticleState64 = particle::ParticleState<f64>;
pub type ParticleTrajectory64 = particle::ParticleTrajectory<f64>;
pub type ConsensusCertificate64 = particle::ConsensusCertificate<f64>;
pub type EmpiricalMeasure64 = meanfield::EmpiricalMeasure<f64>;
pub type MeasureHistory64 = meanfield::MeasureHistory<f64>;
pub type MeanFieldTrajectory64 = meanfield::MeanFieldTrajectory<f64>;
pub type TransportPlan64 = wasserstein::TransportPlan<f64>;
