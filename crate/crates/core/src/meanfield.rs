//! Mean-field regimes solved exactly in the empirical-measure class.
//!
//! Measures are weighted atom clouds; the continuity equations are solved
//! by transporting atoms along characteristics, which is exact for this
//! class by the push-forward representation. Case (i) keeps finitely many
//! discrete leaders; Case (ii) makes both populations measures. Both
//! cases integrate through the same stacked right-hand side as the
//! particle system, so uniform-weight runs reproduce particle runs to the
//! last bit.

use crate::config::DelayConfig;
use crate::dde::{integrate, DenseSolution};
use crate::dynamics::{split_blocks, uniform_weights, weighted_attraction, LeaderFollowerRhs};
use crate::history::HistoryFunction;
use crate::kernel::Kernel;
use crate::particle::{
    decay_certificate, group_diameter, windowed_diameter_raw, ConsensusCertificate,
};
use crate::point::Point;
use crate::{cast, Error, Result, Scalar};

/// Tolerance on the total mass of an empirical measure.
const MASS_TOL: f64 = 1e-12;

/// Additive slack for the velocity-bound checks.
const BOUND_SLACK: f64 = 1e-9;

/// Leader and follower position blocks extracted from a stacked state.
type Blocks<S> = (Vec<Point<S>>, Vec<Point<S>>);

/// Weighted atom cloud representing a probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure<S: Scalar> {
    atoms: Vec<Point<S>>,
    weights: Vec<S>,
}

impl<S: Scalar> EmpiricalMeasure<S> {
    pub fn new(atoms: Vec<Point<S>>, weights: Vec<S>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidArgument("empirical measure needs at least one atom".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "atom/weight count mismatch: {} vs {}",
                atoms.len(),
                weights.len()
            )));
        }
        let dim = atoms[0].dim();
        if atoms.iter().any(|a| a.dim() != dim) {
            return Err(Error::InvalidArgument("atoms differ in dimension".into()));
        }
        let mut total = S::zero();
        for &w in &weights {
            if !w.is_finite() || w <= S::zero() {
                return Err(Error::InvalidArgument(format!(
                    "weights must be positive and finite, got {w}"
                )));
            }
            total += w;
        }
        if (total - S::one()).abs() > cast::<S>(MASS_TOL) {
            return Err(Error::InvalidArgument(format!(
                "weights must sum to 1, got {total}"
            )));
        }
        Ok(Self { atoms, weights })
    }

    /// Uniform weights `1/n`, computed exactly as the particle system's.
    pub fn uniform(atoms: Vec<Point<S>>) -> Result<Self> {
        let w = uniform_weights(atoms.len().max(1));
        Self::new(atoms, w)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].dim()
    }

    pub fn atoms(&self) -> &[Point<S>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    /// True when the weights are exactly the uniform `1/n` vector.
    pub fn has_uniform_weights(&self) -> bool {
        let w = S::one() / S::from_usize(self.len()).expect("atom count fits scalar");
        self.weights.iter().all(|&x| x == w)
    }

    /// The same cloud translated by a fixed vector.
    pub fn shifted(&self, offset: &Point<S>) -> Self {
        Self {
            atoms: self.atoms.iter().map(|a| a + offset).collect(),
            weights: self.weights.clone(),
        }
    }
}

fn check_dim<S: Scalar>(x: &Point<S>, dim: usize) -> Result<()> {
    if x.dim() != dim {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: point has {}, measure has {dim}",
            x.dim()
        )));
    }
    Ok(())
}

/// Case (i) follower velocity: the phi-integral against the delayed
/// follower measure plus the `1/m`-averaged rho pull toward the delayed
/// leaders.
pub fn velocity_case1<S: Scalar>(
    x: &Point<S>,
    nu_delayed: &EmpiricalMeasure<S>,
    leaders_delayed: &[Point<S>],
    phi: &Kernel<S>,
    rho: &Kernel<S>,
) -> Result<Point<S>> {
    check_dim(x, nu_delayed.dim())?;
    if leaders_delayed.is_empty() {
        return Err(Error::InvalidArgument("case (i) needs at least one leader".into()));
    }
    let own = weighted_attraction(x, &nu_delayed.atoms, &nu_delayed.weights, phi);
    let lw = uniform_weights::<S>(leaders_delayed.len());
    let from_leaders = weighted_attraction(x, leaders_delayed, &lw, rho);
    Ok(&own + &from_leaders)
}

/// Case (ii) leader velocity: the psi-integral against the delayed leader
/// measure.
pub fn velocity_case2_leader<S: Scalar>(
    x: &Point<S>,
    mu_delayed: &EmpiricalMeasure<S>,
    psi: &Kernel<S>,
) -> Result<Point<S>> {
    check_dim(x, mu_delayed.dim())?;
    Ok(weighted_attraction(x, &mu_delayed.atoms, &mu_delayed.weights, psi))
}

/// Case (ii) follower velocity: phi-integral against the delayed follower
/// measure plus rho-integral against the delayed leader measure.
pub fn velocity_case2_follower<S: Scalar>(
    x: &Point<S>,
    nu_delayed: &EmpiricalMeasure<S>,
    mu_delayed: &EmpiricalMeasure<S>,
    phi: &Kernel<S>,
    rho: &Kernel<S>,
) -> Result<Point<S>> {
    check_dim(x, nu_delayed.dim())?;
    check_dim(x, mu_delayed.dim())?;
    let own = weighted_attraction(x, &nu_delayed.atoms, &nu_delayed.weights, phi);
    let from_leaders = weighted_attraction(x, &mu_delayed.atoms, &mu_delayed.weights, rho);
    Ok(&own + &from_leaders)
}

/// Measure-valued initial datum on `[-tau, 0]`: one continuous path per
/// atom plus the (time-constant) weights.
#[derive(Debug, Clone)]
pub struct MeasureHistory<S: Scalar> {
    histories: Vec<HistoryFunction<S>>,
    weights: Vec<S>,
}

impl<S: Scalar> MeasureHistory<S> {
    pub fn new(histories: Vec<HistoryFunction<S>>, weights: Vec<S>) -> Result<Self> {
        // reuse the measure validation on the time-zero cloud
        let atoms = histories
            .iter()
            .map(|h| h.eval(S::zero()))
            .collect::<Result<Vec<_>>>()?;
        EmpiricalMeasure::new(atoms, weights.clone())?;
        Ok(Self { histories, weights })
    }

    pub fn uniform(histories: Vec<HistoryFunction<S>>) -> Result<Self> {
        let w = uniform_weights(histories.len().max(1));
        Self::new(histories, w)
    }

    pub fn len(&self) -> usize {
        self.histories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.histories.is_empty()
    }

    pub fn histories(&self) -> &[HistoryFunction<S>] {
        &self.histories
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }
}

/// Which mean-field regime a trajectory was produced by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanFieldCase {
    /// Discrete leaders, measure-valued followers.
    Case1,
    /// Both populations measure-valued.
    Case2,
}

/// A mean-field run: the stacked characteristic system (leader block
/// first) plus the frozen weights. Weights never change in time, which is
/// exactly the continuity equation's mass conservation.
#[derive(Debug, Clone)]
pub struct MeanFieldTrajectory<S: Scalar> {
    sol: DenseSolution<S>,
    case: MeanFieldCase,
    psi: Kernel<S>,
    phi: Kernel<S>,
    rho: Kernel<S>,
    delays: DelayConfig<S>,
    dim: usize,
    leader_weights: Vec<S>,
    follower_weights: Vec<S>,
}

fn validate_block_dims<S: Scalar>(histories: &[HistoryFunction<S>]) -> Result<usize> {
    let dim = histories[0].dim();
    if histories.iter().any(|h| h.dim() != dim) {
        return Err(Error::InvalidArgument("histories differ in dimension".into()));
    }
    Ok(dim)
}

#[allow(clippy::too_many_arguments)]
fn evolve<S: Scalar>(
    case: MeanFieldCase,
    psi: &Kernel<S>,
    phi: &Kernel<S>,
    rho: &Kernel<S>,
    delays: &DelayConfig<S>,
    leader_histories: Vec<HistoryFunction<S>>,
    leader_weights: Vec<S>,
    follower_histories: Vec<HistoryFunction<S>>,
    follower_weights: Vec<S>,
    t_end: S,
    step: S,
) -> Result<MeanFieldTrajectory<S>> {
    if leader_histories.is_empty() || follower_histories.is_empty() {
        return Err(Error::InvalidArgument("both populations need at least one atom".into()));
    }
    let dim = validate_block_dims(&leader_histories)?;
    if validate_block_dims(&follower_histories)? != dim {
        return Err(Error::InvalidArgument("leader/follower dimensions differ".into()));
    }
    let rhs = LeaderFollowerRhs {
        psi: psi.clone(),
        phi: phi.clone(),
        rho: rho.clone(),
        tau1: delays.tau1(),
        tau2: delays.tau2(),
        dim,
        leader_weights: leader_weights.clone(),
        follower_weights: follower_weights.clone(),
    };
    let stacked: Vec<HistoryFunction<S>> = leader_histories
        .into_iter()
        .chain(follower_histories)
        .collect();
    let sol = integrate(&rhs, stacked, delays, t_end, step)?;
    Ok(MeanFieldTrajectory {
        sol,
        case,
        psi: psi.clone(),
        phi: phi.clone(),
        rho: rho.clone(),
        delays: *delays,
        dim,
        leader_weights,
        follower_weights,
    })
}

/// Case (i): finitely many discrete leaders coupled to the follower
/// measure `g`. Leaders carry the particle system's uniform `1/m`
/// weights.
#[allow(clippy::too_many_arguments)]
pub fn evolve_case1<S: Scalar>(
    psi: &Kernel<S>,
    phi: &Kernel<S>,
    rho: &Kernel<S>,
    delays: &DelayConfig<S>,
    leader_histories: Vec<HistoryFunction<S>>,
    g: MeasureHistory<S>,
    t_end: S,
    step: S,
) -> Result<MeanFieldTrajectory<S>> {
    let leader_weights = uniform_weights(leader_histories.len().max(1));
    let MeasureHistory { histories, weights } = g;
    evolve(
        MeanFieldCase::Case1,
        psi,
        phi,
        rho,
        delays,
        leader_histories,
        leader_weights,
        histories,
        weights,
        t_end,
        step,
    )
}

/// Case (ii): both populations measure-valued, `f` for leaders and `g`
/// for followers. The leader measure evolves autonomously.
#[allow(clippy::too_many_arguments)]
pub fn evolve_case2<S: Scalar>(
    psi: &Kernel<S>,
    phi: &Kernel<S>,
    rho: &Kernel<S>,
    delays: &DelayConfig<S>,
    f: MeasureHistory<S>,
    g: MeasureHistory<S>,
    t_end: S,
    step: S,
) -> Result<MeanFieldTrajectory<S>> {
    let MeasureHistory { histories: fh, weights: fw } = f;
    let MeasureHistory { histories: gh, weights: gw } = g;
    evolve(MeanFieldCase::Case2, psi, phi, rho, delays, fh, fw, gh, gw, t_end, step)
}

/// Case (i) support diameter `d^nu`: follower-support pairs, leader
/// pairs, and cross pairs.
pub fn support_diameter_case1<S: Scalar>(
    leaders: &[Point<S>],
    nu: &EmpiricalMeasure<S>,
) -> Result<S> {
    if leaders.is_empty() {
        return Err(Error::InvalidArgument("case (i) needs at least one leader".into()));
    }
    Ok(group_diameter(leaders, &nu.atoms))
}

/// Case (ii) support diameter `d^{mu,nu}` over both supports and the
/// cross pairs.
pub fn support_diameter_case2<S: Scalar>(
    mu: &EmpiricalMeasure<S>,
    nu: &EmpiricalMeasure<S>,
) -> S {
    group_diameter(&mu.atoms, &nu.atoms)
}

/// One velocity field's measured worst ratios against its theoretical
/// Lipschitz and speed bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldBoundCheck<S: Scalar> {
    pub field: &'static str,
    pub lipschitz_bound: S,
    pub worst_lipschitz: S,
    pub speed_bound: S,
    pub worst_speed: S,
    pub pass: bool,
}

/// Report of the velocity-bound checks along a run.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityBoundReport<S: Scalar> {
    pub support_radius_leaders: S,
    pub support_radius_followers: S,
    pub fields: Vec<FieldBoundCheck<S>>,
    pub passed: bool,
}

impl<S: Scalar> MeanFieldTrajectory<S> {
    pub fn case(&self) -> MeanFieldCase {
        self.case
    }

    pub fn solution(&self) -> &DenseSolution<S> {
        &self.sol
    }

    pub fn tau(&self) -> S {
        self.delays.tau()
    }

    pub fn t_end(&self) -> S {
        self.sol.t_end()
    }

    pub fn leader_count(&self) -> usize {
        self.leader_weights.len()
    }

    pub fn follower_count(&self) -> usize {
        self.follower_weights.len()
    }

    pub fn follower_weights(&self) -> &[S] {
        &self.follower_weights
    }

    pub fn leader_weights(&self) -> &[S] {
        &self.leader_weights
    }

    fn blocks_at(&self, t: S) -> Result<Blocks<S>> {
        let flat = self.sol.eval(t)?;
        Ok(split_blocks(&flat, self.leader_count(), self.dim))
    }

    /// Leader positions at `t` (atoms of the leader measure in Case ii).
    pub fn leaders_at(&self, t: S) -> Result<Vec<Point<S>>> {
        Ok(self.blocks_at(t)?.0)
    }

    /// The follower measure at `t`: transported atoms, frozen weights.
    pub fn follower_measure_at(&self, t: S) -> Result<EmpiricalMeasure<S>> {
        let (_, followers) = self.blocks_at(t)?;
        EmpiricalMeasure::new(followers, self.follower_weights.clone())
    }

    /// The leader measure at `t` (uniform `1/m` atoms in Case i).
    pub fn leader_measure_at(&self, t: S) -> Result<EmpiricalMeasure<S>> {
        let (leaders, _) = self.blocks_at(t)?;
        EmpiricalMeasure::new(leaders, self.leader_weights.clone())
    }

    /// Support diameter at `t` (`d^nu` or `d^{mu,nu}` by case).
    pub fn support_diameter_at(&self, t: S) -> Result<S> {
        let (leaders, followers) = self.blocks_at(t)?;
        Ok(group_diameter(&leaders, &followers))
    }

    /// Sampled windowed support diameter over `[n*tau - tau, n*tau]`.
    pub fn windowed_support_diameter(&self, n: usize, sample_count: usize) -> Result<S> {
        windowed_diameter_raw(
            &self.sol,
            self.leader_count(),
            self.dim,
            self.delays.tau(),
            n,
            sample_count,
        )
    }

    /// Max atom norms over `[-tau, t]` for (leaders, followers): the
    /// support radii `R_X(t)` entering the velocity bounds. Histories are
    /// sampled at breakpoints plus interior points; the forward part at
    /// integration grid times up to `t`.
    pub fn support_radii(&self, t: S) -> Result<(S, S)> {
        let mut times: Vec<S> = Vec::new();
        for h in self.sol.histories() {
            for s in h.sample_times() {
                if !times.contains(&s) {
                    times.push(s);
                }
            }
        }
        for g in self.sol.grid_times() {
            if g <= t {
                times.push(g);
            }
        }
        times.push(t.min(self.sol.t_end()));
        let mut r_leaders = S::zero();
        let mut r_followers = S::zero();
        for &s in &times {
            let (leaders, followers) = self.blocks_at(s)?;
            for p in &leaders {
                r_leaders = r_leaders.max(p.norm());
            }
            for p in &followers {
                r_followers = r_followers.max(p.norm());
            }
        }
        // interior history samples tighten the `[-tau, 0]` part
        let m = self.leader_count();
        for (i, h) in self.sol.histories().iter().enumerate() {
            let r = h.max_norm(8);
            if i < m {
                r_leaders = r_leaders.max(r);
            } else {
                r_followers = r_followers.max(r);
            }
        }
        Ok((r_leaders, r_followers))
    }

    /// Combined support radius over both populations on `[-tau, t]`.
    pub fn support_radius(&self, t: S) -> Result<S> {
        let (a, b) = self.support_radii(t)?;
        Ok(a.max(b))
    }

    /// Decay certificate with `d^nu` / `d^{mu,nu}` in place of `d(t)`.
    pub fn certificate(
        &self,
        sample_times: &[S],
        samples_per_window: usize,
    ) -> Result<ConsensusCertificate<S>> {
        decay_certificate(
            &self.psi,
            &self.phi,
            &self.rho,
            &self.delays,
            &self.sol,
            self.leader_count(),
            self.dim,
            sample_times,
            samples_per_window,
        )
    }

    /// Checks the theoretical Lipschitz and boundedness estimates on the
    /// velocity fields against sampled velocities along the run.
    pub fn velocity_bound_check(&self, time_samples: usize) -> Result<VelocityBoundReport<S>> {
        let t_end = self.sol.t_end();
        let (r1, r2) = self.support_radii(t_end)?;
        let k = self
            .psi
            .sup_bound()
            .max(self.phi.sup_bound())
            .max(self.rho.sup_bound());
        let slack = cast::<S>(BOUND_SLACK);
        let times = velocity_sample_times(t_end, time_samples.max(2));

        let mut fields = match self.case {
            MeanFieldCase::Case1 => {
                // K~ = 2 R L_phi + 2K + L_rho (C0 + R), C~ = K (3R + C0)
                let (l_phi, l_rho) = (self.phi.lipschitz_const(), self.rho.lipschitz_const());
                let two = cast::<S>(2.0);
                let three = cast::<S>(3.0);
                vec![FieldBoundCheck {
                    field: "follower",
                    lipschitz_bound: two * r2 * l_phi + two * k + l_rho * (r1 + r2),
                    worst_lipschitz: S::zero(),
                    speed_bound: k * (three * r2 + r1),
                    worst_speed: S::zero(),
                    pass: true,
                }]
            }
            MeanFieldCase::Case2 => {
                // K1 = K + 2 R1 L, K2 = 2K + L (R1 + 3 R2); C1 = 2K R1,
                // C2 = K (R1 + 3 R2)
                let l = self
                    .psi
                    .lipschitz_const()
                    .max(self.phi.lipschitz_const())
                    .max(self.rho.lipschitz_const());
                let two = cast::<S>(2.0);
                let three = cast::<S>(3.0);
                vec![
                    FieldBoundCheck {
                        field: "leader",
                        lipschitz_bound: k + two * r1 * l,
                        worst_lipschitz: S::zero(),
                        speed_bound: two * k * r1,
                        worst_speed: S::zero(),
                        pass: true,
                    },
                    FieldBoundCheck {
                        field: "follower",
                        lipschitz_bound: two * k + l * (r1 + three * r2),
                        worst_lipschitz: S::zero(),
                        speed_bound: k * (r1 + three * r2),
                        worst_speed: S::zero(),
                        pass: true,
                    },
                ]
            }
        };

        for &t in &times {
            let (leaders_now, followers_now) = self.blocks_at(t)?;
            let nu_delayed = {
                let (_, f) = self.blocks_at(t - self.delays.tau2())?;
                EmpiricalMeasure::new(f, self.follower_weights.clone())?
            };
            let (leaders_delayed, _) = self.blocks_at(t - self.delays.tau1())?;
            match self.case {
                MeanFieldCase::Case1 => {
                    let vels: Vec<Point<S>> = followers_now
                        .iter()
                        .map(|x| {
                            velocity_case1(x, &nu_delayed, &leaders_delayed, &self.phi, &self.rho)
                        })
                        .collect::<Result<_>>()?;
                    record_field(&mut fields[0], &followers_now, &vels);
                }
                MeanFieldCase::Case2 => {
                    let mu_delayed =
                        EmpiricalMeasure::new(leaders_delayed, self.leader_weights.clone())?;
                    let u: Vec<Point<S>> = leaders_now
                        .iter()
                        .map(|y| velocity_case2_leader(y, &mu_delayed, &self.psi))
                        .collect::<Result<_>>()?;
                    record_field(&mut fields[0], &leaders_now, &u);
                    let v: Vec<Point<S>> = followers_now
                        .iter()
                        .map(|x| {
                            velocity_case2_follower(x, &nu_delayed, &mu_delayed, &self.phi, &self.rho)
                        })
                        .collect::<Result<_>>()?;
                    record_field(&mut fields[1], &followers_now, &v);
                }
            }
        }

        let mut passed = true;
        for f in &mut fields {
            f.pass = f.worst_speed <= f.speed_bound + slack
                && f.worst_lipschitz <= f.lipschitz_bound + slack;
            passed &= f.pass;
        }
        Ok(VelocityBoundReport {
            support_radius_leaders: r1,
            support_radius_followers: r2,
            fields,
            passed,
        })
    }
}

fn velocity_sample_times<S: Scalar>(t_end: S, count: usize) -> Vec<S> {
    if t_end == S::zero() {
        return vec![S::zero()];
    }
    (0..count)
        .map(|k| t_end * cast::<S>(k as f64 / (count - 1) as f64))
        .collect()
}

/// Folds one time sample's positions and velocities into a field check:
/// worst speed over atoms and worst difference quotient over atom pairs.
fn record_field<S: Scalar>(
    check: &mut FieldBoundCheck<S>,
    positions: &[Point<S>],
    velocities: &[Point<S>],
) {
    for v in velocities {
        check.worst_speed = check.worst_speed.max(v.norm());
    }
    let min_sep = cast::<S>(1e-12);
    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            let sep = positions[i].dist(&positions[j]);
            if sep > min_sep {
                let dv = &velocities[i] - &velocities[j];
                check.worst_lipschitz = check.worst_lipschitz.max(dv.norm() / sep);
            }
        }
    }
}
