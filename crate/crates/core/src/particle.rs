//! The delayed leader-follower particle system: right-hand side,
//! simulation, diameters, and the exponential-decay certificate with all
//! of its constants.

use crate::config::{DelayConfig, ModelConfig};
use crate::dde::{integrate, DenseSolution};
use crate::dynamics::{block_deriv, split_blocks, uniform_weights, LeaderFollowerRhs};
use crate::history::HistoryFunction;
use crate::kernel::Kernel;
use crate::point::Point;
use crate::{cast, Error, Result, Scalar};

/// Additive slack on the decay-bound comparison, absorbing rounding in the
/// bound evaluation itself.
const CERT_SLACK: f64 = 1e-9;

/// Interior samples per history segment used when computing the initial
/// radius `C0`.
const C0_INTERIOR_SAMPLES: usize = 8;

/// Opinions of all agents at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState<S: Scalar> {
    pub leaders: Vec<Point<S>>,
    pub followers: Vec<Point<S>>,
    pub time: S,
}

impl<S: Scalar> ParticleState<S> {
    pub(crate) fn from_flat(flat: &[S], leader_count: usize, dim: usize, time: S) -> Self {
        let (leaders, followers) = split_blocks(flat, leader_count, dim);
        Self { leaders, followers, time }
    }
}

/// Max pairwise distance across the two intra-group blocks and the cross
/// block.
pub(crate) fn group_diameter<S: Scalar>(leaders: &[Point<S>], followers: &[Point<S>]) -> S {
    let mut best = S::zero();
    for (i, a) in followers.iter().enumerate() {
        for b in &followers[i + 1..] {
            best = best.max(a.dist(b));
        }
    }
    for (i, a) in leaders.iter().enumerate() {
        for b in &leaders[i + 1..] {
            best = best.max(a.dist(b));
        }
    }
    for a in leaders {
        for b in followers {
            best = best.max(a.dist(b));
        }
    }
    best
}

/// Global diameter `d(t)` of a configuration: the largest distance over
/// follower-follower, leader-leader, and leader-follower pairs.
pub fn diameter<S: Scalar>(state: &ParticleState<S>) -> S {
    group_diameter(&state.leaders, &state.followers)
}

/// Right-hand side of the particle system at one instant, given the
/// delayed positions each interaction term reads. Leaders are driven only
/// by delayed leaders; followers by delayed followers and delayed leaders,
/// with `1/m` and `1/N` normalization.
pub fn particle_rhs<S: Scalar>(
    psi: &Kernel<S>,
    phi: &Kernel<S>,
    rho: &Kernel<S>,
    state: &ParticleState<S>,
    leaders_delayed: &[Point<S>],
    followers_delayed: &[Point<S>],
) -> (Vec<Point<S>>, Vec<Point<S>>) {
    let leader_weights = uniform_weights::<S>(state.leaders.len());
    let follower_weights = uniform_weights::<S>(state.followers.len());
    block_deriv(
        psi,
        phi,
        rho,
        &leader_weights,
        &follower_weights,
        &state.leaders,
        &state.followers,
        leaders_delayed,
        followers_delayed,
    )
}

/// A simulated run of the particle system on `[-tau, t_end]`.
#[derive(Debug, Clone)]
pub struct ParticleTrajectory<S: Scalar> {
    sol: DenseSolution<S>,
    leader_count: usize,
    dim: usize,
    tau: S,
}

/// Integrates the particle system from its histories.
pub fn simulate<S: Scalar>(
    config: &ModelConfig<S>,
    t_end: S,
    step: S,
) -> Result<ParticleTrajectory<S>> {
    let rhs = LeaderFollowerRhs {
        psi: config.psi.clone(),
        phi: config.phi.clone(),
        rho: config.rho.clone(),
        tau1: config.delays.tau1(),
        tau2: config.delays.tau2(),
        dim: config.dim(),
        leader_weights: uniform_weights(config.leader_count()),
        follower_weights: uniform_weights(config.follower_count()),
    };
    let sol = integrate(&rhs, config.stacked_histories(), &config.delays, t_end, step)?;
    Ok(ParticleTrajectory {
        sol,
        leader_count: config.leader_count(),
        dim: config.dim(),
        tau: config.delays.tau(),
    })
}

impl<S: Scalar> ParticleTrajectory<S> {
    pub fn solution(&self) -> &DenseSolution<S> {
        &self.sol
    }

    pub fn tau(&self) -> S {
        self.tau
    }

    pub fn t_end(&self) -> S {
        self.sol.t_end()
    }

    pub fn state_at(&self, t: S) -> Result<ParticleState<S>> {
        let flat = self.sol.eval(t)?;
        Ok(ParticleState::from_flat(&flat, self.leader_count, self.dim, t))
    }

    pub fn diameter_at(&self, t: S) -> Result<S> {
        Ok(diameter(&self.state_at(t)?))
    }

    /// Sampled windowed diameter `D_n` over `[n*tau - tau, n*tau]`.
    pub fn windowed_diameter(&self, n: usize, sample_count: usize) -> Result<S> {
        windowed_diameter_raw(&self.sol, self.leader_count, self.dim, self.tau, n, sample_count)
    }

    /// Min and max projections `<agent, v>` over a sampled time window.
    pub fn directional_extremes(
        &self,
        v: &Point<S>,
        window: (S, S),
        sample_count: usize,
    ) -> Result<(S, S)> {
        let (a, b) = window;
        if a > b {
            return Err(Error::InvalidArgument(format!("degenerate window [{a}, {b}]")));
        }
        if v.norm() <= S::zero() || v.norm().is_nan() {
            return Err(Error::InvalidArgument("direction vector must be nonzero".into()));
        }
        let times = sample_window(a, b, sample_count.max(2));
        let mut lo = S::infinity();
        let mut hi = S::neg_infinity();
        for t in times {
            let state = self.state_at(t)?;
            for p in state.leaders.iter().chain(&state.followers) {
                let proj = p.dot(v);
                lo = lo.min(proj);
                hi = hi.max(proj);
            }
        }
        Ok((lo, hi))
    }

    /// Full decay certificate for this run.
    pub fn certificate(
        &self,
        psi: &Kernel<S>,
        phi: &Kernel<S>,
        rho: &Kernel<S>,
        delays: &DelayConfig<S>,
        sample_times: &[S],
        samples_per_window: usize,
    ) -> Result<ConsensusCertificate<S>> {
        decay_certificate(
            psi,
            phi,
            rho,
            delays,
            &self.sol,
            self.leader_count,
            self.dim,
            sample_times,
            samples_per_window,
        )
    }
}

fn sample_window<S: Scalar>(a: S, b: S, count: usize) -> Vec<S> {
    if a == b {
        return vec![a];
    }
    let steps = count - 1;
    (0..=steps)
        .map(|k| {
            let frac = cast::<S>(k as f64 / steps as f64);
            a + (b - a) * frac
        })
        .collect()
}

/// Sampled `D_n`. History breakpoints inside the window are always
/// included, which makes `D_0` exact for piecewise-linear histories: on
/// each rectangle of segments the pairwise distance is a norm of an
/// affine map of `(s, t)`, so its maximum sits at a corner.
pub(crate) fn windowed_diameter_raw<S: Scalar>(
    sol: &DenseSolution<S>,
    leader_count: usize,
    dim: usize,
    tau: S,
    n: usize,
    sample_count: usize,
) -> Result<S> {
    let n_s = S::from_usize(n).expect("window index fits scalar");
    let a = n_s * tau - tau;
    let b = n_s * tau;
    let tol = cast::<S>(1e-9) * (S::one() + b.abs());
    if b > sol.t_end() + tol {
        return Err(Error::OutOfRange {
            t: b.to_f64().unwrap_or(f64::NAN),
            lo: sol.t_start().to_f64().unwrap_or(f64::NAN),
            hi: sol.t_end().to_f64().unwrap_or(f64::NAN),
        });
    }
    if sample_count < 2 {
        return Err(Error::InvalidArgument("sample_count must be at least 2".into()));
    }
    let mut times = sample_window(a, b, sample_count);
    if a < S::zero() {
        for h in sol.histories() {
            for t in h.sample_times() {
                if t > a && t < b && !times.contains(&t) {
                    times.push(t);
                }
            }
        }
    }
    let states: Vec<ParticleState<S>> = times
        .iter()
        .map(|&t| {
            let flat = sol.eval(t)?;
            Ok(ParticleState::from_flat(&flat, leader_count, dim, t))
        })
        .collect::<Result<_>>()?;
    let mut best = S::zero();
    for s in &states {
        for t in &states {
            for (i, x) in s.followers.iter().enumerate() {
                for x2 in &t.followers[i..] {
                    best = best.max(x.dist(x2));
                }
            }
            for (i, y) in s.leaders.iter().enumerate() {
                for y2 in &t.leaders[i..] {
                    best = best.max(y.dist(y2));
                }
            }
            for y in &s.leaders {
                for x in &t.followers {
                    best = best.max(y.dist(x));
                }
            }
        }
    }
    Ok(best)
}

/// Every constant of the consensus theorem, from the kernels, delays, and
/// initial data alone.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateConstants<S: Scalar> {
    /// Uniform bound on interaction strengths.
    pub k: S,
    /// Radius bounding all trajectories, from the initial data.
    pub c0: S,
    pub psi0: S,
    pub phi0: S,
    pub rho0: S,
    /// `min(psi0, phi0, rho0)`.
    pub lambda: S,
    /// One-window contraction factor.
    pub c: S,
    /// Three-window contraction factor.
    pub c_tilde: S,
    /// Exponential consensus rate.
    pub gamma: S,
}

/// Computes the theorem constants. `histories` is the full initial block
/// (leaders and followers).
pub fn certificate_constants<S: Scalar>(
    psi: &Kernel<S>,
    phi: &Kernel<S>,
    rho: &Kernel<S>,
    delays: &DelayConfig<S>,
    histories: &[HistoryFunction<S>],
) -> Result<CertificateConstants<S>> {
    let k = psi.sup_bound().max(phi.sup_bound()).max(rho.sup_bound());
    let c0 = histories
        .iter()
        .map(|h| h.max_norm(C0_INTERIOR_SAMPLES))
        .fold(S::zero(), S::max);
    let psi0 = psi.min_on_ball(c0)?;
    let phi0 = phi.min_on_ball(c0)?;
    let rho0 = rho.min_on_ball(c0)?;
    let lambda = psi0.min(phi0).min(rho0);
    if lambda <= S::zero() || lambda.is_nan() {
        return Err(Error::Config(format!(
            "kernel minimum Lambda = {lambda} is not positive on the ball of radius {c0}"
        )));
    }
    let tau = delays.tau();
    let two = cast::<S>(2.0);
    let half_ratio = lambda / (two * k);
    let c = S::one() - half_ratio * (S::one() - (-k * tau).exp());
    let c_tilde = S::one() - (-two * k * tau).exp() * half_ratio * (S::one() - (-k * tau).exp());
    let gamma = if tau > S::zero() {
        -c_tilde.ln() / (cast::<S>(3.0) * tau)
    } else {
        // tau -> 0 limit of -ln(c_tilde) / (3 tau)
        lambda / cast::<S>(6.0)
    };
    if tau > S::zero() && !(c > S::zero() && c < S::one() && c_tilde > S::zero() && c_tilde < S::one())
    {
        return Err(Error::Config(format!(
            "contraction factors out of (0,1): C = {c}, C~ = {c_tilde}"
        )));
    }
    if gamma <= S::zero() || gamma.is_nan() {
        return Err(Error::Config(format!("non-positive decay rate gamma = {gamma}")));
    }
    Ok(CertificateConstants { k, c0, psi0, phi0, rho0, lambda, c, c_tilde, gamma })
}

/// One evaluation of the decay bound.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateCheck<S: Scalar> {
    pub t: S,
    pub diameter: S,
    pub bound: S,
    pub pass: bool,
}

/// The theorem constants plus the recorded decay checks
/// `d(t) <= exp(-gamma (t - 2 tau)) * D0` along a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusCertificate<S: Scalar> {
    pub constants: CertificateConstants<S>,
    pub d0: S,
    pub checks: Vec<CertificateCheck<S>>,
    pub passed: bool,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn decay_certificate<S: Scalar>(
    psi: &Kernel<S>,
    phi: &Kernel<S>,
    rho: &Kernel<S>,
    delays: &DelayConfig<S>,
    sol: &DenseSolution<S>,
    leader_count: usize,
    dim: usize,
    sample_times: &[S],
    samples_per_window: usize,
) -> Result<ConsensusCertificate<S>> {
    let constants = certificate_constants(psi, phi, rho, delays, sol.histories())?;
    let tau = delays.tau();
    let d0 = windowed_diameter_raw(sol, leader_count, dim, tau, 0, samples_per_window.max(2))?;
    let slack = cast::<S>(CERT_SLACK);
    let two = cast::<S>(2.0);
    let mut checks = Vec::with_capacity(sample_times.len());
    let mut passed = true;
    for &t in sample_times {
        if t < S::zero() {
            return Err(Error::InvalidArgument("sample times must be non-negative".into()));
        }
        let flat = sol.eval(t)?;
        let state = ParticleState::from_flat(&flat, leader_count, dim, t);
        let d = diameter(&state);
        let bound = (-constants.gamma * (t - two * tau)).exp() * d0;
        let pass = d <= bound + slack;
        passed &= pass;
        checks.push(CertificateCheck { t, diameter: d, bound, pass });
    }
    Ok(ConsensusCertificate { constants, d0, checks, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::DelayConfig;
    use crate::dde::PastView;

    fn ones() -> Kernel<f64> {
        Kernel::constant(1.0).unwrap()
    }

    fn scalar_points(vals: &[f64]) -> Vec<Point<f64>> {
        vals.iter().map(|&v| Point::scalar(v)).collect()
    }

    #[test]
    fn rhs_hand_example_leaders() {
        // constant kernels, no delay, m = 2, y = (0, 1)
        let state = ParticleState {
            leaders: scalar_points(&[0.0, 1.0]),
            followers: scalar_points(&[0.5]),
            time: 0.0,
        };
        let (dy, _) = particle_rhs(
            &ones(),
            &ones(),
            &ones(),
            &state,
            &state.leaders.clone(),
            &state.followers.clone(),
        );
        assert_eq!(dy[0].coords()[0], 0.5);
        assert_eq!(dy[1].coords()[0], -0.5);
    }

    #[test]
    fn rhs_hand_example_follower_balances() {
        let state = ParticleState {
            leaders: scalar_points(&[0.0, 1.0]),
            followers: scalar_points(&[0.5]),
            time: 0.0,
        };
        let (_, dx) = particle_rhs(
            &ones(),
            &ones(),
            &ones(),
            &state,
            &state.leaders.clone(),
            &state.followers.clone(),
        );
        // own term vanishes (single follower), leader pulls cancel
        assert_eq!(dx[0].coords()[0], 0.0);
    }

    #[test]
    fn rhs_zero_at_consensus() {
        let p = Point::new(vec![0.3, -0.7]).unwrap();
        let state = ParticleState {
            leaders: vec![p.clone(), p.clone()],
            followers: vec![p.clone(), p.clone(), p.clone()],
            time: 0.0,
        };
        let psi = Kernel::inverse_power(1.0, 1.0).unwrap();
        let (dy, dx) = particle_rhs(
            &psi,
            &ones(),
            &psi,
            &state,
            &state.leaders.clone(),
            &state.followers.clone(),
        );
        for d in dy.iter().chain(&dx) {
            assert!(d.coords().iter().all(|&c| c == 0.0));
        }
    }

    #[test]
    fn diameter_examples() {
        let s = ParticleState {
            leaders: scalar_points(&[0.0, 2.0]),
            followers: scalar_points(&[1.0]),
            time: 0.0,
        };
        assert_eq!(diameter(&s), 2.0);

        let s = ParticleState {
            leaders: vec![
                Point::new(vec![0.0, 0.0]).unwrap(),
                Point::new(vec![0.0, 1.0]).unwrap(),
            ],
            followers: vec![
                Point::new(vec![3.0, 0.0]).unwrap(),
                Point::new(vec![0.0, 1.0]).unwrap(),
            ],
            time: 0.0,
        };
        assert!((diameter(&s) - 10.0f64.sqrt()).abs() < 1e-12);

        let p = Point::scalar(4.0);
        let s = ParticleState {
            leaders: vec![p.clone(), p.clone()],
            followers: vec![p.clone()],
            time: 0.0,
        };
        assert_eq!(diameter(&s), 0.0);
    }

    fn two_leader_config(tau: f64, n: usize) -> ModelConfig<f64> {
        let delays = DelayConfig::new(tau, tau).unwrap();
        let leaders = vec![
            HistoryFunction::constant(Point::scalar(0.0), tau).unwrap(),
            HistoryFunction::constant(Point::scalar(1.0), tau).unwrap(),
        ];
        let followers = (0..n)
            .map(|i| {
                HistoryFunction::constant(Point::scalar(0.5 + 0.01 * i as f64), tau).unwrap()
            })
            .collect();
        ModelConfig::new(ones(), ones(), ones(), delays, leaders, followers).unwrap()
    }

    #[test]
    fn leader_gap_decays_like_exponential() {
        // with psi = 1 and no delay, z = y1 - y2 obeys z' = -z
        let config = two_leader_config(0.0, 3);
        let traj = simulate(&config, 1.0, 1e-3).unwrap();
        let s = traj.state_at(1.0).unwrap();
        let gap = s.leaders[0].dist(&s.leaders[1]);
        assert!((gap - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn consensus_initial_data_stays_constant() {
        let tau = 0.25;
        let delays = DelayConfig::new(tau, tau).unwrap();
        let p = Point::scalar(0.4);
        let hist = |_: usize| HistoryFunction::constant(p.clone(), tau).unwrap();
        let config = ModelConfig::new(
            ones(),
            ones(),
            ones(),
            delays,
            (0..2).map(hist).collect(),
            (0..3).map(hist).collect(),
        )
        .unwrap();
        let traj = simulate(&config, 2.0, 0.05).unwrap();
        for t in [0.5, 1.0, 2.0] {
            let s = traj.state_at(t).unwrap();
            for q in s.leaders.iter().chain(&s.followers) {
                assert_eq!(q.coords()[0], 0.4);
            }
        }
    }

    #[test]
    fn windowed_diameter_constant_trajectories() {
        let config = two_leader_config(0.5, 3);
        let traj = simulate(&config, 0.0, 0.1).unwrap();
        // t_end = 0: only the history window exists
        let d0 = traj.windowed_diameter(0, 8).unwrap();
        assert_eq!(d0, 1.0);
    }

    #[test]
    fn windowed_diameter_from_decaying_leaders() {
        // two independent scalar components integrating y' = -y from +-1
        let hist = vec![
            HistoryFunction::constant(Point::scalar(1.0), 1.0).unwrap(),
            HistoryFunction::constant(Point::scalar(-1.0), 1.0).unwrap(),
        ];
        let delays = DelayConfig::new(1.0, 1.0).unwrap();
        let rhs = |_t: f64, y: &[f64], _p: &PastView<'_, f64>| y.iter().map(|v| -v).collect();
        let sol = integrate(&rhs, hist, &delays, 1.0, 0.05).unwrap();
        let d1 = windowed_diameter_raw(&sol, 2, 1, 1.0, 1, 32).unwrap();
        assert!((d1 - 2.0).abs() < 1e-12, "d1 = {d1}");
    }

    #[test]
    fn windowed_diameter_out_of_range() {
        let config = two_leader_config(0.5, 3);
        let traj = simulate(&config, 1.0, 0.05).unwrap();
        assert!(traj.windowed_diameter(10, 8).is_err());
    }

    #[test]
    fn directional_extremes_examples() {
        let tau = 0.5;
        let delays = DelayConfig::new(tau, tau).unwrap();
        let mk = |v: f64| HistoryFunction::constant(Point::scalar(v), tau).unwrap();
        let config = ModelConfig::new(
            ones(),
            ones(),
            ones(),
            delays,
            vec![mk(0.0), mk(1.0)],
            vec![mk(3.0), mk(0.5), mk(0.7)],
        )
        .unwrap();
        let traj = simulate(&config, 0.0, 0.1).unwrap();
        let (lo, hi) = traj
            .directional_extremes(&Point::scalar(1.0), (-0.5, 0.0), 4)
            .unwrap();
        assert_eq!((lo, hi), (0.0, 3.0));
        let (lo, hi) = traj
            .directional_extremes(&Point::scalar(-1.0), (-0.5, 0.0), 4)
            .unwrap();
        assert_eq!((lo, hi), (-3.0, 0.0));
        assert!(traj
            .directional_extremes(&Point::scalar(1.0), (0.5, 0.0), 4)
            .is_err());
        assert!(traj
            .directional_extremes(&Point::scalar(0.0), (-0.5, 0.0), 4)
            .is_err());
    }

    #[test]
    fn closed_form_constants() {
        // constant kernels: K = Lambda = 1, tau = 0.5
        let delays = DelayConfig::new(0.5, 0.5).unwrap();
        let hist = vec![
            HistoryFunction::constant(Point::scalar(0.0), 0.5).unwrap(),
            HistoryFunction::constant(Point::scalar(1.0), 0.5).unwrap(),
        ];
        let c = certificate_constants(&ones(), &ones(), &ones(), &delays, &hist).unwrap();
        assert!((c.c - 0.8032653).abs() < 1e-6);
        assert!((c.c_tilde - 0.9276250).abs() < 1e-6);
        assert!((c.gamma - 0.0500847).abs() < 1e-6);
        assert_eq!(c.k, 1.0);
        assert_eq!(c.lambda, 1.0);
    }

    #[test]
    fn certificate_passes_on_analytic_run() {
        let config = two_leader_config(0.0, 3);
        let traj = simulate(&config, 5.0, 1e-2).unwrap();
        let times: Vec<f64> = (0..=50).map(|k| k as f64 * 0.1).collect();
        let cert = traj
            .certificate(&ones(), &ones(), &ones(), &config.delays, &times, 32)
            .unwrap();
        assert!(cert.passed);
        assert!(cert.constants.gamma > 0.0);
        assert_eq!(cert.checks.len(), times.len());
    }

    #[test]
    fn certificate_rejects_fabricated_non_decay() {
        // constant (consensus-free) trajectory: diameter never decays, so
        // the bound must fail strictly after the transient window
        let tau = 0.25;
        let delays = DelayConfig::new(tau, tau).unwrap();
        let hist = vec![
            HistoryFunction::constant(Point::scalar(0.0), tau).unwrap(),
            HistoryFunction::constant(Point::scalar(1.0), tau).unwrap(),
        ];
        // frozen dynamics stand in for a fabricated d(t) = D0 series
        let rhs = |_t: f64, y: &[f64], _p: &PastView<'_, f64>| vec![0.0; y.len()];
        let sol = integrate(&rhs, hist, &delays, 5.0, 0.05).unwrap();
        let times: Vec<f64> = (0..=50).map(|k| k as f64 * 0.1).collect();
        let cert =
            decay_certificate(&ones(), &ones(), &ones(), &delays, &sol, 2, 1, &times, 16).unwrap();
        assert!(!cert.passed);
        let first_fail = cert.checks.iter().find(|c| !c.pass).unwrap();
        assert!(first_fail.t > 2.0 * tau);
    }
}
