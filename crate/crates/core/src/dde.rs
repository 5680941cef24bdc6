//! Fixed-step RK4 integrator for delay differential equations with
//! cubic-Hermite dense output.
//!
//! The method-of-steps constraint `step <= min positive delay` guarantees
//! that every delayed lookup reads an already-committed segment, so the
//! scheme stays explicit. Stage lookups use the stage time minus the delay,
//! which keeps fourth order on smooth segments. The state update is
//! Kahan-compensated so that rounding does not mask the truncation order
//! at small steps.

use crate::config::DelayConfig;
use crate::history::HistoryFunction;
use crate::{cast, Error, Result, Scalar};

/// One integration step: cubic Hermite data on `[t0, t1]`.
#[derive(Debug, Clone, PartialEq)]
struct Segment<S: Scalar> {
    t0: S,
    t1: S,
    y0: Vec<S>,
    y1: Vec<S>,
    f0: Vec<S>,
    f1: Vec<S>,
}

impl<S: Scalar> Segment<S> {
    fn eval(&self, t: S) -> Vec<S> {
        if t == self.t0 {
            return self.y0.clone();
        }
        if t == self.t1 {
            return self.y1.clone();
        }
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let two = cast::<S>(2.0);
        let three = cast::<S>(3.0);
        // difference form: exact y0 for constant segments
        (0..self.y0.len())
            .map(|i| {
                let d = (self.y1[i] - self.y0[i]) / h;
                let c2 = three * d - two * self.f0[i] - self.f1[i];
                let c3 = self.f0[i] + self.f1[i] - two * d;
                self.y0[i] + h * s * (self.f0[i] + s * (c2 + s * c3))
            })
            .collect()
    }
}

/// Trajectory with history block on `[-tau, 0]` and Hermite segments on
/// `[0, t_end]`, evaluable anywhere in between. Immutable after
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution<S: Scalar> {
    histories: Vec<HistoryFunction<S>>,
    dim: usize,
    t_start: S,
    t_end: S,
    segments: Vec<Segment<S>>,
}

fn eval_histories<S: Scalar>(histories: &[HistoryFunction<S>], t: S, out: &mut Vec<S>) {
    out.clear();
    for h in histories {
        let p = h.eval(t).expect("history evaluation in range");
        out.extend_from_slice(p.coords());
    }
}

fn eval_committed<S: Scalar>(
    histories: &[HistoryFunction<S>],
    segments: &[Segment<S>],
    t_start: S,
    end: S,
    t: S,
) -> Result<Vec<S>> {
    let tol = cast::<S>(1e-9) * (S::one() + t.abs());
    if t < t_start - tol || t > end + tol {
        return Err(Error::OutOfRange {
            t: t.to_f64().unwrap_or(f64::NAN),
            lo: t_start.to_f64().unwrap_or(f64::NAN),
            hi: end.to_f64().unwrap_or(f64::NAN),
        });
    }
    let t = t.max(t_start).min(end);
    if t <= S::zero() || segments.is_empty() {
        let mut out = Vec::new();
        eval_histories(histories, t.min(S::zero()), &mut out);
        return Ok(out);
    }
    let idx = segments.partition_point(|s| s.t1 < t).min(segments.len() - 1);
    Ok(segments[idx].eval(t))
}

impl<S: Scalar> DenseSolution<S> {
    /// State at any `t` in `[-tau, t_end]`; exact at grid points.
    pub fn eval(&self, t: S) -> Result<Vec<S>> {
        eval_committed(&self.histories, &self.segments, self.t_start, self.t_end, t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_start(&self) -> S {
        self.t_start
    }

    pub fn t_end(&self) -> S {
        self.t_end
    }

    /// The initial-history block the solution was built from.
    pub fn histories(&self) -> &[HistoryFunction<S>] {
        &self.histories
    }

    /// Integration grid points in `(0, t_end]`.
    pub fn grid_times(&self) -> impl Iterator<Item = S> + '_ {
        self.segments.iter().map(|s| s.t1)
    }
}

/// Read-only view of the already-committed part of the solution, handed to
/// the right-hand side for delayed lookups.
pub struct PastView<'a, S: Scalar> {
    histories: &'a [HistoryFunction<S>],
    segments: &'a [Segment<S>],
    t_start: S,
    end: S,
}

impl<S: Scalar> PastView<'_, S> {
    /// Committed state at `t`; `t` must not exceed the committed horizon,
    /// which the integrator's step constraint guarantees.
    pub fn eval(&self, t: S) -> Vec<S> {
        eval_committed(self.histories, self.segments, self.t_start, self.end, t)
            .expect("delayed lookup within committed range")
    }
}

/// Right-hand side of a DDE: derivative from the current state and the
/// committed past.
pub trait DelayedRhs<S: Scalar> {
    fn deriv(&self, t: S, state: &[S], past: &PastView<'_, S>) -> Vec<S>;
}

impl<S: Scalar, F> DelayedRhs<S> for F
where
    F: Fn(S, &[S], &PastView<'_, S>) -> Vec<S>,
{
    fn deriv(&self, t: S, state: &[S], past: &PastView<'_, S>) -> Vec<S> {
        self(t, state, past)
    }
}

/// Integrates `rhs` from the history block up to `t_end` with fixed-step
/// RK4. If a delay is positive, `step` must not exceed it.
pub fn integrate<S: Scalar>(
    rhs: &impl DelayedRhs<S>,
    histories: Vec<HistoryFunction<S>>,
    delays: &DelayConfig<S>,
    t_end: S,
    step: S,
) -> Result<DenseSolution<S>> {
    if histories.is_empty() {
        return Err(Error::InvalidArgument("empty history block".into()));
    }
    if !step.is_finite() || step <= S::zero() {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if !t_end.is_finite() || t_end < S::zero() {
        return Err(Error::InvalidArgument(format!("t_end must be non-negative, got {t_end}")));
    }
    for (name, tau) in [("tau1", delays.tau1()), ("tau2", delays.tau2())] {
        if tau > S::zero() && step > tau {
            return Err(Error::InvalidArgument(format!(
                "step {step} exceeds positive delay {name} = {tau}"
            )));
        }
    }
    let t_start = histories[0].start_time();
    for h in &histories {
        if h.start_time() != t_start {
            return Err(Error::InvalidArgument("histories start at different times".into()));
        }
    }
    if t_start > -delays.tau() {
        return Err(Error::InvalidArgument(
            "history block does not cover the maximal delay".into(),
        ));
    }

    let dim: usize = histories.iter().map(|h| h.dim()).sum();
    let mut state = Vec::with_capacity(dim);
    eval_histories(&histories, S::zero(), &mut state);

    let mut segments: Vec<Segment<S>> = Vec::new();
    let mut compensation = vec![S::zero(); dim];
    let half = cast::<S>(0.5);
    let two = cast::<S>(2.0);
    let sixth = S::one() / cast::<S>(6.0);
    let tol = cast::<S>(1e-12) * (S::one() + t_end.abs());

    let mut t = S::zero();
    let mut f_start: Option<Vec<S>> = None;
    while t < t_end - tol {
        let h_raw = step.min(t_end - t);
        let t1 = if t + h_raw >= t_end - tol { t_end } else { t + h_raw };
        let h = t1 - t;
        let past = PastView { histories: &histories, segments: &segments, t_start, end: t };
        let k1 = match f_start.take() {
            Some(f) => f,
            None => rhs.deriv(t, &state, &past),
        };
        let mid = t + half * h;
        let stage = |k: &[S]| -> Vec<S> {
            (0..dim).map(|i| state[i] + half * h * k[i]).collect()
        };
        let k2 = rhs.deriv(mid, &stage(&k1), &past);
        let k3 = rhs.deriv(mid, &stage(&k2), &past);
        let full: Vec<S> = (0..dim).map(|i| state[i] + h * k3[i]).collect();
        let k4 = rhs.deriv(t1, &full, &past);

        let y0 = state.clone();
        for i in 0..dim {
            let delta = h * sixth * (k1[i] + two * (k2[i] + k3[i]) + k4[i]);
            // Kahan-compensated accumulation across steps
            let adj = delta - compensation[i];
            let sum = state[i] + adj;
            compensation[i] = (sum - state[i]) - adj;
            state[i] = sum;
        }
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { t: t1.to_f64().unwrap_or(f64::NAN) });
        }
        // derivative at the right endpoint, also reused as the next k1
        let f1 = {
            let past = PastView { histories: &histories, segments: &segments, t_start, end: t };
            rhs.deriv(t1, &state, &past)
        };
        segments.push(Segment { t0: t, t1, y0, y1: state.clone(), f0: k1, f1: f1.clone() });
        f_start = Some(f1);
        t = t1;
    }

    Ok(DenseSolution { histories, dim, t_start, t_end, segments })
}
