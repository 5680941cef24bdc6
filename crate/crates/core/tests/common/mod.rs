//! Shared randomized-configuration generators for the integration tests.
// not every test file uses every helper
#![allow(dead_code)]

use hkdelay_core::config::{DelayConfig, ModelConfig};
use hkdelay_core::history::HistoryFunction;
use hkdelay_core::kernel::Kernel;
use hkdelay_core::point::Point;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_kernel(rng: &mut ChaCha8Rng) -> Kernel<f64> {
    match rng.gen_range(0..3) {
        0 => Kernel::constant(rng.gen_range(0.5..2.0)).unwrap(),
        1 => Kernel::inverse_power(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)).unwrap(),
        _ => Kernel::truncated_exponential(
            rng.gen_range(0.5..1.5),
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.05..0.2),
        )
        .unwrap(),
    }
}

/// A point with norm at most `radius` (componentwise box inside the ball).
pub fn random_point(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Point<f64> {
    let bound = radius / (dim as f64).sqrt();
    Point::new((0..dim).map(|_| rng.gen_range(-bound..bound)).collect()).unwrap()
}

pub fn random_history(rng: &mut ChaCha8Rng, dim: usize, radius: f64, tau: f64) -> HistoryFunction<f64> {
    if tau == 0.0 || rng.gen_bool(0.5) {
        HistoryFunction::constant(random_point(rng, dim, radius), tau).unwrap()
    } else {
        HistoryFunction::linear(
            random_point(rng, dim, radius),
            random_point(rng, dim, radius),
            tau,
        )
        .unwrap()
    }
}

/// Random particle configuration within the acceptance envelope:
/// m in {2,3}, N in {4..16}, builtin kernels, initial radius <= 5.
pub fn random_config(rng: &mut ChaCha8Rng, tau: f64, dim: usize) -> ModelConfig<f64> {
    let m = rng.gen_range(2..=3usize);
    let n = rng.gen_range(4..=16usize);
    let radius = rng.gen_range(0.5..5.0);
    let delays = if tau > 0.0 && rng.gen_bool(0.5) {
        DelayConfig::new(tau, tau / 2.0).unwrap()
    } else {
        DelayConfig::new(tau, tau).unwrap()
    };
    let tau_max = delays.tau();
    let leaders = (0..m).map(|_| random_history(rng, dim, radius, tau_max)).collect();
    let followers = (0..n).map(|_| random_history(rng, dim, radius, tau_max)).collect();
    ModelConfig::new(
        random_kernel(rng),
        random_kernel(rng),
        random_kernel(rng),
        delays,
        leaders,
        followers,
    )
    .unwrap()
}

/// Step size respecting the method-of-steps constraint.
pub fn sim_step(delays: &DelayConfig<f64>) -> f64 {
    let mut step = 0.02f64;
    for tau in [delays.tau1(), delays.tau2()] {
        if tau > 0.0 {
            step = step.min(tau);
        }
    }
    step
}

pub const TAUS: [f64; 3] = [0.0, 0.25, 1.0];
