//! Model configuration: delays, kernels, populations, initial histories.

use crate::history::HistoryFunction;
use crate::kernel::Kernel;
use crate::{Error, Result, Scalar};

/// Leader and follower information delays; `tau` is their maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayConfig<S: Scalar> {
    tau1: S,
    tau2: S,
}

impl<S: Scalar> DelayConfig<S> {
    pub fn new(tau1: S, tau2: S) -> Result<Self> {
        for (name, t) in [("tau1", tau1), ("tau2", tau2)] {
            if !t.is_finite() || t < S::zero() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and non-negative, got {t}"
                )));
            }
        }
        Ok(Self { tau1, tau2 })
    }

    pub fn tau1(&self) -> S {
        self.tau1
    }

    pub fn tau2(&self) -> S {
        self.tau2
    }

    /// Maximal delay `tau = max(tau1, tau2)`.
    pub fn tau(&self) -> S {
        self.tau1.max(self.tau2)
    }
}

/// Full particle-model configuration.
#[derive(Debug, Clone)]
pub struct ModelConfig<S: Scalar> {
    pub psi: Kernel<S>,
    pub phi: Kernel<S>,
    pub rho: Kernel<S>,
    pub delays: DelayConfig<S>,
    leader_histories: Vec<HistoryFunction<S>>,
    follower_histories: Vec<HistoryFunction<S>>,
}

impl<S: Scalar> ModelConfig<S> {
    pub fn new(
        psi: Kernel<S>,
        phi: Kernel<S>,
        rho: Kernel<S>,
        delays: DelayConfig<S>,
        leader_histories: Vec<HistoryFunction<S>>,
        follower_histories: Vec<HistoryFunction<S>>,
    ) -> Result<Self> {
        let m = leader_histories.len();
        let n = follower_histories.len();
        if m < 2 {
            return Err(Error::Config(format!("need at least 2 leaders, got {m}")));
        }
        if n <= m {
            return Err(Error::Config(format!(
                "follower count must exceed leader count, got N = {n}, m = {m}"
            )));
        }
        let tau = delays.tau();
        let dim = leader_histories[0].dim();
        for h in leader_histories.iter().chain(&follower_histories) {
            if h.dim() != dim {
                return Err(Error::Config("histories differ in dimension".into()));
            }
            if h.start_time() != -tau {
                return Err(Error::Config(format!(
                    "history must span [-tau, 0] with tau = {tau}, starts at {}",
                    h.start_time()
                )));
            }
        }
        Ok(Self { psi, phi, rho, delays, leader_histories, follower_histories })
    }

    pub fn leader_count(&self) -> usize {
        self.leader_histories.len()
    }

    pub fn follower_count(&self) -> usize {
        self.follower_histories.len()
    }

    pub fn dim(&self) -> usize {
        self.leader_histories[0].dim()
    }

    pub fn leader_histories(&self) -> &[HistoryFunction<S>] {
        &self.leader_histories
    }

    pub fn follower_histories(&self) -> &[HistoryFunction<S>] {
        &self.follower_histories
    }

    /// All histories stacked leaders-first, the state layout used by the
    /// integrator.
    pub fn stacked_histories(&self) -> Vec<HistoryFunction<S>> {
        self.leader_histories
            .iter()
            .chain(&self.follower_histories)
            .cloned()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point;

    fn consts(vals: &[f64], tau: f64) -> Vec<HistoryFunction<f64>> {
        vals.iter()
            .map(|&v| HistoryFunction::constant(Point::scalar(v), tau).unwrap())
            .collect()
    }

    #[test]
    fn delay_config_tau_is_max() {
        let d = DelayConfig::new(0.5, 1.5).unwrap();
        assert_eq!(d.tau(), 1.5);
        assert!(DelayConfig::new(-0.1, 0.0).is_err());
        assert!(DelayConfig::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn population_constraint() {
        let k = Kernel::constant(1.0).unwrap();
        let d = DelayConfig::new(0.0, 0.0).unwrap();
        // N must exceed m >= 2
        assert!(ModelConfig::new(
            k.clone(),
            k.clone(),
            k.clone(),
            d,
            consts(&[0.0, 1.0], 0.0),
            consts(&[0.5, 0.6], 0.0),
        )
        .is_err());
        assert!(ModelConfig::new(
            k.clone(),
            k.clone(),
            k.clone(),
            d,
            consts(&[0.0], 0.0),
            consts(&[0.5, 0.6], 0.0),
        )
        .is_err());
        assert!(ModelConfig::new(
            k.clone(),
            k.clone(),
            k,
            d,
            consts(&[0.0, 1.0], 0.0),
            consts(&[0.5, 0.6, 0.7], 0.0),
        )
        .is_ok());
    }

    #[test]
    fn history_span_must_match_tau() {
        let k = Kernel::constant(1.0).unwrap();
        let d = DelayConfig::new(1.0, 0.5).unwrap();
        let bad = ModelConfig::new(
            k.clone(),
            k.clone(),
            k,
            d,
            consts(&[0.0, 1.0], 0.5),
            consts(&[0.5, 0.6, 0.7], 0.5),
        );
        assert!(bad.is_err());
    }
}
