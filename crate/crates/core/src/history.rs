//! Piecewise-linear initial histories on `[-tau, 0]`.

use crate::point::Point;
use crate::{cast, Error, Result, Scalar};

/// Continuous piecewise-linear function from `[-tau, 0]` to `R^d`,
/// given by samples at strictly increasing times ending at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryFunction<S: Scalar> {
    samples: Vec<(S, Point<S>)>,
}

impl<S: Scalar> HistoryFunction<S> {
    pub fn new(samples: Vec<(S, Point<S>)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("history needs at least one sample".into()));
        }
        let dim = samples[0].1.dim();
        for (t, p) in &samples {
            if !t.is_finite() {
                return Err(Error::InvalidArgument("history sample time not finite".into()));
            }
            if p.dim() != dim {
                return Err(Error::InvalidArgument("history samples differ in dimension".into()));
            }
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidArgument("history times must be strictly increasing".into()));
            }
        }
        let last = samples.last().unwrap().0;
        if last != S::zero() {
            return Err(Error::InvalidArgument(format!("history must end at t = 0, got {last}")));
        }
        if samples[0].0 > S::zero() {
            return Err(Error::InvalidArgument("history must start at t <= 0".into()));
        }
        Ok(Self { samples })
    }

    /// History that is constant on `[-tau, 0]`.
    pub fn constant(point: Point<S>, tau: S) -> Result<Self> {
        if !tau.is_finite() || tau < S::zero() {
            return Err(Error::InvalidArgument("tau must be finite and non-negative".into()));
        }
        if tau == S::zero() {
            Self::new(vec![(S::zero(), point)])
        } else {
            Self::new(vec![(-tau, point.clone()), (S::zero(), point)])
        }
    }

    /// Linear interpolation from `start` at `-tau` to `end` at 0.
    pub fn linear(start: Point<S>, end: Point<S>, tau: S) -> Result<Self> {
        if tau == S::zero() {
            Self::new(vec![(S::zero(), end)])
        } else {
            Self::new(vec![(-tau, start), (S::zero(), end)])
        }
    }

    pub fn dim(&self) -> usize {
        self.samples[0].1.dim()
    }

    /// Leftmost sample time (`-tau`).
    pub fn start_time(&self) -> S {
        self.samples[0].0
    }

    pub fn samples(&self) -> &[(S, Point<S>)] {
        &self.samples
    }

    pub fn sample_times(&self) -> impl Iterator<Item = S> + '_ {
        self.samples.iter().map(|(t, _)| *t)
    }

    /// Piecewise-linear interpolant value; exact at sample times.
    pub fn eval(&self, t: S) -> Result<Point<S>> {
        let lo = self.start_time();
        let tol = cast::<S>(1e-9) * (S::one() + lo.abs());
        if !(t >= lo - tol && t <= tol) {
            return Err(Error::OutOfRange {
                t: t.to_f64().unwrap_or(f64::NAN),
                lo: lo.to_f64().unwrap_or(f64::NAN),
                hi: 0.0,
            });
        }
        let t = t.min(S::zero()).max(lo);
        // exact at sample times
        if let Some((_, p)) = self.samples.iter().find(|(s, _)| *s == t) {
            return Ok(p.clone());
        }
        let idx = self.samples.partition_point(|(s, _)| *s < t);
        let (t0, p0) = &self.samples[idx - 1];
        let (t1, p1) = &self.samples[idx];
        let w = (t - *t0) / (*t1 - *t0);
        let mut out = p0.scaled(S::one() - w);
        out.axpy(w, p1);
        Ok(out)
    }

    /// Max Euclidean norm along the history. Exact at segment endpoints;
    /// `interior` additional points per segment tighten the interior part.
    pub fn max_norm(&self, interior: usize) -> S {
        let mut best = S::zero();
        for (_, p) in &self.samples {
            best = best.max(p.norm());
        }
        for w in self.samples.windows(2) {
            for k in 1..=interior {
                let frac = cast::<S>(k as f64 / (interior as f64 + 1.0));
                let mut p = w[0].1.scaled(S::one() - frac);
                p.axpy(frac, &w[1].1);
                best = best.max(p.norm());
            }
        }
        best
    }

    /// Largest per-unit-time variation of the interpolant.
    pub fn max_slope(&self) -> S {
        let mut best = S::zero();
        for w in self.samples.windows(2) {
            let slope = w[1].1.dist(&w[0].1) / (w[1].0 - w[0].0);
            best = best.max(slope);
        }
        best
    }

    /// Same history translated by a fixed vector.
    pub fn shifted(&self, offset: &Point<S>) -> Self {
        Self {
            samples: self.samples.iter().map(|(t, p)| (*t, p + offset)).collect(),
        }
    }
}
