//! Shared right-hand side of the delayed leader-follower dynamics.
//!
//! The particle system and both mean-field regimes are the same stacked
//! DDE: a leader block interacting through `psi` with its own delayed
//! block, and a follower block attracted to its delayed self through `phi`
//! and to the delayed leaders through `rho`. They differ only in the
//! weights attached to the interaction partners (uniform `1/m`, `1/N` for
//! particles; empirical-measure weights for atoms). Funnelling every case
//! through this one code path is what makes the particle/mean-field
//! consistency exact to the last bit.

use crate::dde::{DelayedRhs, PastView};
use crate::kernel::Kernel;
use crate::point::Point;
use crate::Scalar;

/// `1/n` repeated `n` times, computed the same way everywhere.
pub(crate) fn uniform_weights<S: Scalar>(n: usize) -> Vec<S> {
    let w = S::one() / S::from_usize(n).expect("population count fits scalar");
    vec![w; n]
}

/// `sum_k w_k * kernel(x, a_k) * (a_k - x)`.
pub(crate) fn weighted_attraction<S: Scalar>(
    x: &Point<S>,
    atoms: &[Point<S>],
    weights: &[S],
    kernel: &Kernel<S>,
) -> Point<S> {
    let mut acc = Point::zeros(x.dim());
    for (a, w) in atoms.iter().zip(weights) {
        let coupling = *w * kernel.eval(x, a);
        let mut pull = a - x;
        pull = pull.scaled(coupling);
        acc = &acc + &pull;
    }
    acc
}

/// Derivatives of the leader and follower blocks given current positions
/// and the delayed positions each term reads.
#[allow(clippy::too_many_arguments)]
pub(crate) fn block_deriv<S: Scalar>(
    psi: &Kernel<S>,
    phi: &Kernel<S>,
    rho: &Kernel<S>,
    leader_weights: &[S],
    follower_weights: &[S],
    leaders_now: &[Point<S>],
    followers_now: &[Point<S>],
    leaders_delayed: &[Point<S>],
    followers_delayed: &[Point<S>],
) -> (Vec<Point<S>>, Vec<Point<S>>) {
    let leader_derivs = leaders_now
        .iter()
        .map(|y| weighted_attraction(y, leaders_delayed, leader_weights, psi))
        .collect();
    let follower_derivs = followers_now
        .iter()
        .map(|x| {
            let own = weighted_attraction(x, followers_delayed, follower_weights, phi);
            let from_leaders = weighted_attraction(x, leaders_delayed, leader_weights, rho);
            &own + &from_leaders
        })
        .collect();
    (leader_derivs, follower_derivs)
}

pub(crate) fn split_blocks<S: Scalar>(
    flat: &[S],
    leader_count: usize,
    dim: usize,
) -> (Vec<Point<S>>, Vec<Point<S>>) {
    let split = leader_count * dim;
    let leaders = flat[..split].chunks_exact(dim).map(Point::from_slice).collect();
    let followers = flat[split..].chunks_exact(dim).map(Point::from_slice).collect();
    (leaders, followers)
}

/// The stacked DDE shared by the particle system and both mean-field
/// regimes. State layout: leaders first, then followers, `dim` components
/// each.
pub(crate) struct LeaderFollowerRhs<S: Scalar> {
    pub psi: Kernel<S>,
    pub phi: Kernel<S>,
    pub rho: Kernel<S>,
    pub tau1: S,
    pub tau2: S,
    pub dim: usize,
    pub leader_weights: Vec<S>,
    pub follower_weights: Vec<S>,
}

impl<S: Scalar> DelayedRhs<S> for LeaderFollowerRhs<S> {
    fn deriv(&self, t: S, state: &[S], past: &PastView<'_, S>) -> Vec<S> {
        let m = self.leader_weights.len();
        let (leaders_now, followers_now) = split_blocks(state, m, self.dim);
        let (leaders_delayed, followers_delayed) = if self.tau1 == self.tau2 {
            if self.tau1 > S::zero() {
                split_blocks(&past.eval(t - self.tau1), m, self.dim)
            } else {
                (leaders_now.clone(), followers_now.clone())
            }
        } else {
            let leaders = if self.tau1 > S::zero() {
                split_blocks(&past.eval(t - self.tau1), m, self.dim).0
            } else {
                leaders_now.clone()
            };
            let followers = if self.tau2 > S::zero() {
                split_blocks(&past.eval(t - self.tau2), m, self.dim).1
            } else {
                followers_now.clone()
            };
            (leaders, followers)
        };
        let (dy, dx) = block_deriv(
            &self.psi,
            &self.phi,
            &self.rho,
            &self.leader_weights,
            &self.follower_weights,
            &leaders_now,
            &followers_now,
            &leaders_delayed,
            &followers_delayed,
        );
        let mut out = Vec::with_capacity(state.len());
        for p in dy.iter().chain(dx.iter()) {
            out.extend_from_slice(p.coords());
        }
        out
    }
}
